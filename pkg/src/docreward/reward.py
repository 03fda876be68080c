"""Multi-aspect reward for one (prediction, reference) pair and group-relative
advantage normalization for RL rollouts.

The reward has three terms, each in [0, 1] under the defaults:

* distance - mean edit similarity over optimally matched segment pairs,
* count    - 1 - |n_ref - n_pred| / n_ref, clamped at zero,
* order    - 1 - inversions / max_inversions over the matched pairs.

The total is their weighted sum (unit weights by default, so a perfect
prediction scores 3.0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DuplicateElements, EmptyGroup, MalformedTags, MatchDocumentMismatch
from .matching import MatchResult, build_cost_matrix, hungarian_assign
from .segmenter import (
    DEFAULT_POLICY,
    Document,
    NormalizationPolicy,
    SourceMode,
    segment_markdown,
)


class OrderDenominator(enum.Enum):
    REFERENCE_PAIRS = "reference_pairs"
    MATCHED_PAIRS = "matched_pairs"


@dataclass(frozen=True)
class RewardConfig:
    w_dist: float = 1.0
    w_count: float = 1.0
    w_order: float = 1.0
    clamp_count_at_zero: bool = True
    order_denominator: OrderDenominator = OrderDenominator.REFERENCE_PAIRS
    min_similarity: float | None = None
    # on MalformedTags in a tagged-mode prediction, re-segment as plain blocks
    # instead of raising
    fallback_to_plain_blocks: bool = False

    def __post_init__(self) -> None:
        for name in ("w_dist", "w_count", "w_order"):
            w = getattr(self, name)
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"{name} must be finite and >= 0")
        if self.min_similarity is not None and not 0.0 <= self.min_similarity <= 1.0:
            raise ValueError("min_similarity must be in [0, 1]")


DEFAULT_REWARD_CONFIG = RewardConfig()


@dataclass(frozen=True)
class RewardBreakdown:
    r_dist: float
    r_count: float
    r_order: float
    total: float
    n_ref: int
    n_pred: int
    n_matched: int
    inversions: int


@dataclass(frozen=True)
class GroupAdvantages:
    rewards: tuple[float, ...]
    advantages: tuple[float, ...]
    epsilon: float


def _check_match(matches: MatchResult, reference: Document, prediction: Document) -> None:
    for i, j, _ in matches.pairs:
        if not (0 <= i < len(reference)) or not (0 <= j < len(prediction)):
            raise MatchDocumentMismatch(
                f"pair ({i}, {j}) outside documents of size "
                f"{len(reference)}x{len(prediction)}"
            )


def dist_reward(matches: MatchResult, reference: Document, prediction: Document) -> float:
    """Mean edit similarity over matched pairs; 1.0 when both documents are
    empty, 0.0 when there are no matched pairs otherwise."""
    _check_match(matches, reference, prediction)
    if len(reference) == 0 and len(prediction) == 0:
        return 1.0
    if not matches.pairs:
        return 0.0
    return sum(s for _, _, s in matches.pairs) / len(matches.pairs)


def count_reward(n_ref: int, n_pred: int, clamp: bool = True) -> float:
    """1 - |n_ref - n_pred| / n_ref, optionally clamped at zero."""
    if n_ref < 0 or n_pred < 0:
        raise ValueError("segment counts must be non-negative")
    if n_ref == 0:
        return 1.0 if n_pred == 0 else 0.0
    value = 1.0 - abs(n_ref - n_pred) / n_ref
    return max(0.0, value) if clamp else value


def count_inversions(sequence) -> int:
    """Number of out-of-order pairs, by merge sort (O(n log n))."""
    seq = list(sequence)
    if len(set(seq)) != len(seq):
        raise DuplicateElements("sequence elements must be pairwise distinct")

    def sort(items: list) -> tuple[list, int]:
        if len(items) <= 1:
            return items, 0
        mid = len(items) // 2
        left, inv_l = sort(items[:mid])
        right, inv_r = sort(items[mid:])
        merged = []
        inv = inv_l + inv_r
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                j += 1
                inv += len(left) - i
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, inv

    return sort(seq)[1]


def order_reward(
    matches: MatchResult,
    n_ref: int,
    denominator: OrderDenominator = OrderDenominator.REFERENCE_PAIRS,
) -> float:
    """1 - inversions / max_inversions over matched pairs taken in reference
    order; 1.0 whenever max_inversions is zero."""
    pairs = sorted(matches.pairs)
    pred_seq = [j for _, j, _ in pairs]
    if denominator is OrderDenominator.REFERENCE_PAIRS:
        max_inv = n_ref * (n_ref - 1) // 2
    else:
        m = len(pairs)
        max_inv = m * (m - 1) // 2
    if max_inv == 0:
        return 1.0
    return 1.0 - count_inversions(pred_seq) / max_inv


def multi_aspect_reward(
    prediction: str,
    reference: str,
    config: RewardConfig = DEFAULT_REWARD_CONFIG,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    mode: SourceMode = SourceMode.ELE_TAGGED,
) -> RewardBreakdown:
    """Full pipeline: segment both sides, match, score the three terms."""
    ref_doc = segment_markdown(reference, mode, policy)
    try:
        pred_doc = segment_markdown(prediction, mode, policy)
    except MalformedTags:
        if not config.fallback_to_plain_blocks:
            raise
        pred_doc = segment_markdown(prediction, SourceMode.PLAIN_BLOCKS, policy)
    return reward_from_documents(pred_doc, ref_doc, config)


def reward_from_documents(
    prediction: Document,
    reference: Document,
    config: RewardConfig = DEFAULT_REWARD_CONFIG,
) -> RewardBreakdown:
    matches = hungarian_assign(
        build_cost_matrix(reference, prediction), config.min_similarity
    )
    r_dist = dist_reward(matches, reference, prediction)
    r_count = count_reward(len(reference), len(prediction), config.clamp_count_at_zero)
    r_order = order_reward(matches, len(reference), config.order_denominator)
    total = config.w_dist * r_dist + config.w_count * r_count + config.w_order * r_order
    pred_seq = [j for _, j, _ in sorted(matches.pairs)]
    return RewardBreakdown(
        r_dist=r_dist,
        r_count=r_count,
        r_order=r_order,
        total=total,
        n_ref=len(reference),
        n_pred=len(prediction),
        n_matched=len(matches.pairs),
        inversions=count_inversions(pred_seq),
    )


def group_advantages(rewards, epsilon: float = 1e-12) -> GroupAdvantages:
    """Normalize a rollout group's rewards to zero-mean advantages:
    (r - mean) / (population std + epsilon).  Equal rewards give exact
    zeros.

    The default epsilon is small enough that the advantages keep unit
    standard deviation (to within 1e-6) for any group whose reward spread
    is at least 1e-6; it exists only to keep the division defined under
    extreme cancellation.
    """
    values = [float(r) for r in rewards]
    if not values:
        raise EmptyGroup("need at least one reward")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if all(v == values[0] for v in values):
        advantages = [0.0] * len(values)
    else:
        mean = sum(values) / len(values)
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        advantages = [(v - mean) / (std + epsilon) for v in values]
    return GroupAdvantages(
        rewards=tuple(values), advantages=tuple(advantages), epsilon=epsilon
    )
