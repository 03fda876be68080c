"""Layout-aware rewards and end-to-end evaluation for Markdown document
parsers: segmentation, optimal segment matching, multi-aspect RL rewards with
group advantages, TEDS table scoring, benchmark-style reports and aligned
synthetic page generation."""

__version__ = "0.1.0"

from .errors import (
    DepthLimitExceeded,
    DocRewardError,
    DuplicateElements,
    EmptyGroup,
    InsufficientContent,
    IoFailure,
    MalformedTags,
    MatchDocumentMismatch,
    NoTableFound,
    SlotKindMismatch,
    UnknownAttributeKey,
    UnrecognizedStructure,
    UnsupportedFormat,
)
from .eval_harness import (
    DocScore,
    EvalRecord,
    EvalReport,
    aggregate,
    emit_report,
    evaluate_document,
    evaluate_records,
    load_dataset,
    reading_order_score,
)
from .matching import CostMatrix, MatchResult, build_cost_matrix, hungarian_assign
from .reward import (
    GroupAdvantages,
    OrderDenominator,
    RewardBreakdown,
    RewardConfig,
    count_inversions,
    count_reward,
    dist_reward,
    group_advantages,
    multi_aspect_reward,
    order_reward,
    reward_from_documents,
)
from .segmenter import (
    DEFAULT_POLICY,
    Document,
    Kind,
    NormalizationPolicy,
    Segment,
    SourceMode,
    classify_block,
    normalize_text,
    segment_markdown,
)
from .synth_gen import (
    ContentBlock,
    ContentSample,
    FilterRules,
    LayoutTemplate,
    Slot,
    SynthPage,
    build_manifest,
    builtin_templates,
    extract_ground_truth,
    filter_pages,
    generate_pages,
    instantiate_template,
)
from .table_teds import (
    TableTree,
    TedsCostModel,
    markdown_table_to_html,
    parse_table_html,
    teds,
    tree_edit_distance,
)
from .text_distance import (
    DistanceResult,
    EditCosts,
    distance_result,
    edit_similarity,
    levenshtein,
    ned_matrix,
    normalized_edit_distance,
)
