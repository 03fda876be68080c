"""Split Markdown (plain or <ele>-tagged) into typed, ordered segments.

A segment is the atomic unit everything downstream consumes: counting,
ordering, matching and the per-pair edit rewards all operate on the segments
produced here, so both reward and evaluation share one notion of "paragraph".
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

from .errors import MalformedTags

ELE_OPEN = "<ele>"
ELE_CLOSE = "</ele>"

_ELE_TAG_RE = re.compile(r"</?ele>")
_HEADING_RE = re.compile(r"^#{1,6}(\s|$)")
_IMAGE_RE = re.compile(r"!\[([^\[\]]*)\]\([^()]*\)")
_LINK_RE = re.compile(r"\[([^\[\]]*)\]\([^()]*\)")
_EMPHASIS_TABLE = {ord("*"): None, ord("_"): None, ord("`"): None}


class Kind(enum.Enum):
    TEXT = "text"
    HEADING = "heading"
    TABLE = "table"
    FORMULA = "formula"
    CODE = "code"


class SourceMode(enum.Enum):
    ELE_TAGGED = "ele"
    PLAIN_BLOCKS = "blocks"


@dataclass(frozen=True)
class NormalizationPolicy:
    """Deterministic, idempotent text cleanup applied to every segment.

    unicode_form: "NFC" or "none".
    strip_inline_markup: drop emphasis markers and reduce links/images to
    their text.
    """

    unicode_form: str = "NFC"
    collapse_whitespace: bool = True
    strip_inline_markup: bool = False
    lowercase: bool = False


DEFAULT_POLICY = NormalizationPolicy()
RAW_POLICY = NormalizationPolicy(
    unicode_form="none",
    collapse_whitespace=False,
    strip_inline_markup=False,
    lowercase=False,
)


@dataclass(frozen=True)
class Segment:
    index: int
    kind: Kind
    raw: str
    text: str


@dataclass(frozen=True)
class Document:
    segments: tuple[Segment, ...]
    source_mode: SourceMode
    # non-whitespace characters found outside <ele> regions and dropped
    stray_chars: int = 0

    def __len__(self) -> int:
        return len(self.segments)

    def texts(self) -> list[str]:
        return [s.text for s in self.segments]

    def of_kind(self, kind: Kind) -> list[Segment]:
        return [s for s in self.segments if s.kind is kind]


def normalize_text(raw: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> str:
    """Apply the policy to raw text; applying it twice equals applying it once."""
    out = raw
    if policy.strip_inline_markup:
        out = out.translate(_EMPHASIS_TABLE)
        # Images first, then links, repeated together: a rewrite can expose a
        # new pattern, so iterate to a fixed point (each step shrinks the
        # string, so this terminates).
        while True:
            prev = out
            out = _IMAGE_RE.sub(r"\1", out)
            out = _LINK_RE.sub(r"\1", out)
            if out == prev:
                break
    if policy.collapse_whitespace:
        out = " ".join(out.split())
    if policy.lowercase:
        out = out.lower()
    if policy.unicode_form == "NFC":
        out = unicodedata.normalize("NFC", out)
    return out


def classify_block(raw: str) -> Kind:
    """Kind of a single block; precedence Code > Table > Formula > Heading > Text.

    Leading and trailing whitespace is ignored.  Only standalone display-math
    blocks count as formulas; only single heading lines count as headings.
    """
    s = raw.strip()
    if not s:
        return Kind.TEXT
    if s.startswith("```") or s.startswith("~~~"):
        return Kind.CODE
    if s.startswith("|") or s.startswith("<table"):
        return Kind.TABLE
    if len(s) >= 4 and (
        (s.startswith("$$") and s.endswith("$$"))
        or (s.startswith("\\[") and s.endswith("\\]"))
    ):
        return Kind.FORMULA
    if "\n" not in s and _HEADING_RE.match(s):
        return Kind.HEADING
    return Kind.TEXT


def segment_markdown(
    source: str,
    mode: SourceMode = SourceMode.PLAIN_BLOCKS,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> Document:
    """Parse model output or reference Markdown into an ordered Document.

    Tagged mode requires well-nested, non-overlapping literal <ele></ele>
    pairs and yields exactly one segment per region (text between regions is
    dropped, counted in Document.stray_chars).  Plain mode splits on blank
    lines while keeping fenced code, pipe tables, <table> elements and
    display math whole.  Empty input yields an empty Document.
    """
    if mode is SourceMode.ELE_TAGGED:
        raws, stray = _split_ele_regions(source)
    else:
        raws = _split_plain_blocks(source)
        stray = 0
    segments = tuple(
        Segment(index=i, kind=classify_block(raw), raw=raw, text=normalize_text(raw, policy))
        for i, raw in enumerate(raws)
    )
    return Document(segments=segments, source_mode=mode, stray_chars=stray)


def _split_ele_regions(source: str) -> tuple[list[str], int]:
    regions: list[str] = []
    stray: list[str] = []
    open_start: int | None = None
    last_end = 0
    for m in _ELE_TAG_RE.finditer(source):
        if m.group(0) == ELE_OPEN:
            if open_start is not None:
                raise MalformedTags(f"nested {ELE_OPEN} at offset {m.start()}")
            stray.append(source[last_end:m.start()])
            open_start = m.end()
        else:
            if open_start is None:
                raise MalformedTags(f"{ELE_CLOSE} without {ELE_OPEN} at offset {m.start()}")
            regions.append(source[open_start:m.start()])
            open_start = None
            last_end = m.end()
    if open_start is not None:
        raise MalformedTags(f"unclosed {ELE_OPEN}")
    stray.append(source[last_end:])
    stray_chars = sum(1 for chunk in stray for ch in chunk if not ch.isspace())
    return regions, stray_chars


def _split_plain_blocks(source: str) -> list[str]:
    lines = source.split("\n")
    n = len(lines)
    blocks: list[str] = []
    current: list[str] = []

    def flush() -> None:
        if current:
            blocks.append("\n".join(current))
            current.clear()

    i = 0
    while i < n:
        line = lines[i]
        s = line.strip()
        if not s:
            flush()
            i += 1
        elif s.startswith("```") or s.startswith("~~~"):
            flush()
            i = _consume_fence(lines, i, s[:3], blocks)
        elif s.startswith("$$"):
            flush()
            i = _consume_math(lines, i, "$$", blocks)
        elif s.startswith("\\["):
            flush()
            i = _consume_math(lines, i, "\\]", blocks)
        elif s.startswith("|"):
            flush()
            i = _consume_pipe_table(lines, i, blocks)
        elif s.startswith("<table"):
            flush()
            i = _consume_html_table(lines, i, blocks)
        elif "\n" not in s and _HEADING_RE.match(s):
            flush()
            blocks.append(line)
            i += 1
        else:
            current.append(line)
            i += 1
    flush()
    return blocks


def _consume_fence(lines: list[str], i: int, fence: str, blocks: list[str]) -> int:
    block = [lines[i]]
    i += 1
    while i < len(lines):
        block.append(lines[i])
        if lines[i].strip().startswith(fence):
            i += 1
            break
        i += 1
    blocks.append("\n".join(block))
    return i


def _consume_math(lines: list[str], i: int, closer: str, blocks: list[str]) -> int:
    s = lines[i].strip()
    block = [lines[i]]
    closed = len(s) > 2 and s.endswith(closer)
    i += 1
    while not closed and i < len(lines):
        block.append(lines[i])
        if lines[i].strip().endswith(closer):
            closed = True
        i += 1
    blocks.append("\n".join(block))
    return i


def _consume_pipe_table(lines: list[str], i: int, blocks: list[str]) -> int:
    block = [lines[i]]
    i += 1
    n = len(lines)
    while i < n:
        s = lines[i].strip()
        if s.startswith("|"):
            block.append(lines[i])
            i += 1
        elif not s:
            # A blank run stays inside the table only when another row follows.
            j = i
            while j < n and not lines[j].strip():
                j += 1
            if j < n and lines[j].strip().startswith("|"):
                block.extend(lines[i:j])
                i = j
            else:
                break
        else:
            break
    blocks.append("\n".join(block))
    return i


def _consume_html_table(lines: list[str], i: int, blocks: list[str]) -> int:
    block = [lines[i]]
    depth = lines[i].count("<table") - lines[i].count("</table")
    i += 1
    while depth > 0 and i < len(lines):
        block.append(lines[i])
        depth += lines[i].count("<table") - lines[i].count("</table")
        i += 1
    blocks.append("\n".join(block))
    return i
