"""Optimal one-to-one segment assignment.

The cost of pairing a reference segment with a predicted segment is their
normalized edit distance, so the matcher minimizes exactly the quantity the
distance reward later averages.  Rectangular matrices are padded to square
with a constant dummy cost; dummy pairings mean "unmatched" and the constant
cancels out of the argmin.

Among equal-cost assignments the result is the lexicographically smallest
(ref_index, pred_index) pair list, which keeps outputs deterministic across
platforms and solver orderings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .segmenter import Document
from .text_distance import ned_matrix

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    _HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@dataclass(frozen=True)
class CostMatrix:
    rows: int
    cols: int
    cost: np.ndarray  # shape (rows, cols), entries in [0, 1]


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int, float], ...]  # (ref_index, pred_index, similarity)
    unmatched_ref: tuple[int, ...]
    unmatched_pred: tuple[int, ...]
    total_cost: float

    @property
    def pred_sequence(self) -> list[int]:
        """Predicted indices in reference order (pairs are ref-sorted)."""
        return [p for _, p, _ in self.pairs]


def build_cost_matrix(reference: Document, prediction: Document) -> CostMatrix:
    """Pairwise cost 1 - edit_similarity between segment texts."""
    cost = ned_matrix(reference.texts(), prediction.texts())
    return CostMatrix(rows=len(reference), cols=len(prediction), cost=cost)


def hungarian_assign(
    matrix: CostMatrix | np.ndarray | list,
    min_similarity: float | None = None,
) -> MatchResult:
    """Minimum-total-cost one-to-one assignment of a rectangular cost matrix.

    Exactly min(rows, cols) pairs are produced; if min_similarity is given,
    pairs whose similarity (1 - cost) falls below it are demoted to unmatched
    after solving.  Ties resolve to the lexicographically smallest pair list.
    """
    cost = matrix.cost if isinstance(matrix, CostMatrix) else np.asarray(matrix, dtype=np.float64)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim == 1 and cost.size == 0:
        cost = cost.reshape(0, 0)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be two-dimensional")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix entries must be finite")
    rows, cols = cost.shape

    if rows == 0 or cols == 0:
        return MatchResult(
            pairs=(),
            unmatched_ref=tuple(range(rows)),
            unmatched_pred=tuple(range(cols)),
            total_cost=0.0,
        )

    row_to_col = _lex_min_assignment(cost)

    pairs = []
    total = 0.0
    for i in range(rows):
        j = row_to_col[i]
        if j >= 0:
            c = float(cost[i, j])
            pairs.append((i, j, 1.0 - c))
            total += c

    if min_similarity is not None:
        kept = [p for p in pairs if p[2] >= min_similarity]
        pairs = kept
        total = sum(1.0 - s for _, _, s in pairs)

    matched_r = {i for i, _, _ in pairs}
    matched_p = {j for _, j, _ in pairs}
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_ref=tuple(i for i in range(rows) if i not in matched_r),
        unmatched_pred=tuple(j for j in range(cols) if j not in matched_p),
        total_cost=total,
    )


def _pad_square(cost: np.ndarray) -> np.ndarray:
    rows, cols = cost.shape
    s = max(rows, cols)
    if rows == cols:
        return cost
    dummy = float(cost.max()) + 1.0
    padded = np.full((s, s), dummy, dtype=np.float64)
    padded[:rows, :cols] = cost
    return padded


def _lex_min_assignment(cost: np.ndarray) -> list[int]:
    """Row -> col assignment (-1 for unmatched rows), optimal in total cost
    and lexicographically minimal among optima.

    Every perfect matching of the padded square matrix uses the same number
    of dummy pairings, so all totals here are over real pairs only.
    """
    rows, cols = cost.shape
    padded = _pad_square(cost)
    col_to_row, u, v = _hungarian_square(padded)
    s = padded.shape[0]

    witness = [-1] * s  # row -> col over the square problem
    for j in range(s):
        if col_to_row[j] >= 0:
            witness[col_to_row[j]] = j

    opt_total = sum(
        float(padded[i, witness[i]]) for i in range(rows) if witness[i] < cols
    )
    scale = max(1.0, float(np.max(np.abs(padded))))
    eps_rc = 1e-9 * scale
    eps_total = 1e-12 * scale * max(1.0, float(s))

    fixed: dict[int, int] = {}
    fixed_cost = 0.0
    dropped_rows: list[int] = []
    used_cols: set[int] = set()

    for i in range(rows):
        w = witness[i] if witness[i] < cols else -1
        # tight edges are the only ones any optimal assignment may use
        cands = [
            j
            for j in range(cols)
            if j not in used_cols and padded[i, j] - u[i] - v[j] <= eps_rc
        ]
        choice = w
        if w < 0 or (cands and cands[0] < w):
            for j in cands:
                if 0 <= w <= j:
                    break
                sub_total, sub_assign = _constrained_optimum(
                    padded, rows, cols, fixed, dropped_rows, i, j
                )
                if fixed_cost + padded[i, j] + sub_total <= opt_total + eps_total:
                    choice = j
                    # the sub-solution becomes the witness for later rows
                    for r, c in sub_assign.items():
                        witness[r] = c if c >= 0 else s
                    break
        if choice >= 0:
            fixed[i] = choice
            fixed_cost += float(padded[i, choice])
            used_cols.add(choice)
        else:
            dropped_rows.append(i)

    out = [-1] * rows
    for i, j in fixed.items():
        out[i] = j
    return out


def _constrained_optimum(
    padded: np.ndarray,
    rows: int,
    cols: int,
    fixed: dict[int, int],
    dropped_rows: list[int],
    force_row: int,
    force_col: int,
):
    """Best real-pair total over the rows/cols still free once
    (force_row, force_col) is pinned; also returns that sub-assignment."""
    skip_rows = set(fixed) | set(dropped_rows) | {force_row}
    skip_cols = set(fixed.values()) | {force_col}
    rem_rows = [i for i in range(rows) if i not in skip_rows]
    rem_cols = [j for j in range(cols) if j not in skip_cols]
    assign = {r: -1 for r in rem_rows}
    if not rem_rows or not rem_cols:
        return 0.0, assign
    sub = np.ascontiguousarray(padded[np.ix_(rem_rows, rem_cols)])
    col_to_row, _, _ = _hungarian_square(_pad_square(sub))
    total = 0.0
    for jj in range(len(rem_cols)):
        ii = col_to_row[jj]
        if 0 <= ii < len(rem_rows):
            total += float(sub[ii, jj])
            assign[rem_rows[ii]] = rem_cols[jj]
    return total, assign


@njit(cache=True)
def _hungarian_square(a):  # pragma: no cover - exercised via hungarian_assign
    """Potentials method on a square matrix; returns (col->row, u, v)."""
    n = a.shape[0]
    u = np.zeros(n + 1, dtype=np.float64)
    v = np.zeros(n + 1, dtype=np.float64)
    p = np.full(n + 1, -1, dtype=np.int64)  # p[j] = row matched to col j (0-based cols shifted by 1)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1, dtype=np.float64)
    used = np.empty(n + 1, dtype=np.bool_)

    for i in range(n):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = np.inf
            used[j] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = -1
            for j in range(1, n + 1):
                if not used[j]:
                    cur = a[i0, j - 1] - u[i0 + 1] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j] + 1] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == -1:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    col_to_row = np.full(n, -1, dtype=np.int64)
    for j in range(1, n + 1):
        if p[j] >= 0:
            col_to_row[j - 1] = p[j]
    u_out = np.empty(n, dtype=np.float64)
    v_out = np.empty(n, dtype=np.float64)
    for i in range(n):
        u_out[i] = u[i + 1]
        v_out[i] = v[i + 1]
    return col_to_row, u_out, v_out
