"""Exception types raised across the package."""


class DocRewardError(Exception):
    """Base class for all package errors."""


class MalformedTags(DocRewardError):
    """Unbalanced or nested <ele> tags in tagged-mode input."""


class DuplicateElements(DocRewardError):
    """Inversion counting requires pairwise-distinct elements."""


class MatchDocumentMismatch(DocRewardError):
    """A MatchResult references segment indices outside the documents."""


class EmptyGroup(DocRewardError):
    """Group advantage computation needs at least one reward."""


class NoTableFound(DocRewardError):
    """HTML input contains no <table> element."""


class DepthLimitExceeded(DocRewardError):
    """Table markup nests deeper than the parser guard allows."""


class UnknownAttributeKey(DocRewardError):
    """A grouping key is missing from a record's attributes."""


class UnsupportedFormat(DocRewardError):
    """Report serialization was asked for an unknown format."""


class SlotKindMismatch(DocRewardError):
    """A content block was placed into a slot of a different kind."""


class InsufficientContent(DocRewardError):
    """A content sample cannot fill every slot of a template."""


class UnrecognizedStructure(DocRewardError):
    """HTML outside the known template grammar."""


class IoFailure(DocRewardError):
    """Filesystem failure while writing generated pages or manifests."""
