"""Character-level Levenshtein distance, normalized edit distance and edit
similarity over Unicode code points.

Unit-cost distances run through Myers' bit-parallel algorithm: a big-integer
variant for single calls and a numba-compiled block variant for the pairwise
matrices the matcher needs.  Both are checked bit-identical to the plain
dynamic program in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@dataclass(frozen=True)
class EditCosts:
    insert: int = 1
    delete: int = 1
    substitute: int = 1

    def __post_init__(self) -> None:
        for name in ("insert", "delete", "substitute"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} cost must be a non-negative integer")

    @property
    def is_unit(self) -> bool:
        return self.insert == 1 and self.delete == 1 and self.substitute == 1


UNIT_COSTS = EditCosts()


@dataclass(frozen=True)
class DistanceResult:
    distance: int
    len_ref: int
    len_pred: int
    ned: float


def levenshtein(a: str, b: str, costs: EditCosts = UNIT_COSTS) -> int:
    """Minimum total cost of single-character edits transforming b into a."""
    if a == b:
        return 0
    if costs.is_unit:
        return _lev_unit(a, b)
    return _lev_dp(a, b, costs.insert, costs.delete, costs.substitute)


def normalized_edit_distance(a: str, b: str) -> float:
    """Unit-cost distance divided by the longer length; 0 when both empty."""
    n = max(len(a), len(b))
    if n == 0:
        return 0.0
    return levenshtein(a, b) / n


def edit_similarity(a: str, b: str) -> float:
    return 1.0 - normalized_edit_distance(a, b)


def distance_result(a: str, b: str) -> DistanceResult:
    d = levenshtein(a, b)
    n = max(len(a), len(b))
    return DistanceResult(
        distance=d,
        len_ref=len(a),
        len_pred=len(b),
        ned=d / n if n else 0.0,
    )


def _lev_unit(a: str, b: str) -> int:
    """Myers bit-parallel unit-cost distance; the whole pattern lives in one
    Python big integer, so working space is O(min(len(a), len(b)))."""
    if len(a) < len(b):
        pattern, text = a, b
    else:
        pattern, text = b, a
    m = len(pattern)
    if m == 0:
        return len(text)

    peq: dict[str, int] = {}
    for i, ch in enumerate(pattern):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    mask = (1 << m) - 1
    hbit = 1 << (m - 1)

    vp = mask
    vn = 0
    score = m
    for ch in text:
        eq = peq.get(ch, 0)
        xv = eq | vn
        xh = ((((eq & vp) + vp) ^ vp) | eq) & mask
        hp = vn | (~(xh | vp) & mask)
        hn = vp & xh
        if hp & hbit:
            score += 1
        elif hn & hbit:
            score -= 1
        hp = ((hp << 1) | 1) & mask
        hn = (hn << 1) & mask
        vp = hn | (~(xv | hp) & mask)
        vn = hp & xv
    return score


def _lev_dp(a: str, b: str, ins: int, dele: int, sub: int) -> int:
    """Two-row dynamic program for arbitrary costs (row over the shorter
    string).  D[i][j] = cost of turning b[:j] into a[:i]."""
    if len(b) > len(a):
        a, b = b, a
        ins, dele = dele, ins
    m = len(b)
    prev = [j * dele for j in range(m + 1)]
    for i in range(1, len(a) + 1):
        ca = a[i - 1]
        cur = [i * ins] + [0] * m
        for j in range(1, m + 1):
            rep = prev[j - 1] + (0 if ca == b[j - 1] else sub)
            cur[j] = min(prev[j] + ins, cur[j - 1] + dele, rep)
        prev = cur
    return prev[m]


# ---------------------------------------------------------------------------
# Batched pairwise NED


def _encode(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)


def _flatten(texts: list[str]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(texts) + 1, dtype=np.int64)
    for i, t in enumerate(texts):
        offsets[i + 1] = offsets[i] + len(t)
    flat = np.empty(offsets[-1], dtype=np.uint32)
    for i, t in enumerate(texts):
        if t:
            flat[offsets[i] : offsets[i + 1]] = _encode(t)
    return flat, offsets


def ned_matrix(refs: list[str], preds: list[str]) -> np.ndarray:
    """Dense matrix of normalized edit distances, refs on rows."""
    out = np.zeros((len(refs), len(preds)), dtype=np.float64)
    if not refs or not preds:
        return out
    if _HAS_NUMBA:
        rflat, roff = _flatten(refs)
        pflat, poff = _flatten(preds)
        # remap code points onto a dense shared alphabet so the kernel can
        # index Peq rows directly (vectorized here, gathers inside the kernel)
        alphabet = np.unique(np.concatenate((rflat, pflat)))
        rmap = np.searchsorted(alphabet, rflat).astype(np.int64)
        pmap = np.searchsorted(alphabet, pflat).astype(np.int64)
        _ned_matrix_kernel(rmap, roff, pmap, poff, int(alphabet.shape[0]), out)
        return out
    for i, r in enumerate(refs):
        for j, p in enumerate(preds):
            out[i, j] = normalized_edit_distance(r, p)
    return out


@njit(cache=True)
def _ned_matrix_kernel(rflat, roff, pflat, poff, n_alpha, out):  # pragma: no cover - exercised via ned_matrix
    n_ref = roff.shape[0] - 1
    n_pred = poff.shape[0] - 1
    one = np.uint64(1)
    zero = np.uint64(0)
    full = np.uint64(0xFFFFFFFFFFFFFFFF)

    for i in range(n_ref):
        pat = rflat[roff[i] : roff[i + 1]]
        m = pat.shape[0]
        if m == 0:
            for j in range(n_pred):
                out[i, j] = 1.0 if poff[j + 1] > poff[j] else 0.0
            continue

        nblocks = (m + 63) >> 6
        peq = np.zeros(n_alpha * nblocks, dtype=np.uint64)
        for k in range(m):
            peq[pat[k] * nblocks + (k >> 6)] |= one << np.uint64(k & 63)

        last = nblocks - 1
        vp = np.empty(nblocks, dtype=np.uint64)
        vn = np.empty(nblocks, dtype=np.uint64)

        for j in range(n_pred):
            txt = pflat[poff[j] : poff[j + 1]]
            n = txt.shape[0]
            if n == 0:
                out[i, j] = 1.0
                continue
            score = m
            hshift = np.uint64((m - 1) & 63)
            if nblocks == 1:
                # single-word fast path: state lives in registers, scoring is
                # branchless (HP and HN are never set at the same position)
                pv = full
                mv = zero
                for p in range(n):
                    eq = peq[txt[p]]
                    xv = eq | mv
                    xh = (((eq & pv) + pv) ^ pv) | eq
                    ph = mv | ~(xh | pv)
                    mh = pv & xh
                    score += np.int64((ph >> hshift) & one) - np.int64(
                        (mh >> hshift) & one
                    )
                    ph = (ph << one) | one
                    mh = mh << one
                    pv = mh | ~(xv | ph)
                    mv = ph & xv
            else:
                for b in range(nblocks):
                    vp[b] = full
                    vn[b] = zero
                for p in range(n):
                    row = txt[p] * nblocks
                    hin = np.int64(1)
                    for b in range(nblocks):
                        eq = peq[row + b]
                        pv = vp[b]
                        mv = vn[b]
                        xv = eq | mv
                        eq |= np.uint64(hin < 0)
                        xh = (((eq & pv) + pv) ^ pv) | eq
                        ph = mv | ~(xh | pv)
                        mh = pv & xh
                        if b == last:
                            score += np.int64((ph >> hshift) & one) - np.int64(
                                (mh >> hshift) & one
                            )
                        hout = np.int64(ph >> np.uint64(63)) - np.int64(
                            mh >> np.uint64(63)
                        )
                        ph = (ph << one) | np.uint64(hin > 0)
                        mh = (mh << one) | np.uint64(hin < 0)
                        vp[b] = mh | ~(xv | ph)
                        vn[b] = ph & xv
                        hin = hout
            longer = m if m > n else n
            out[i, j] = score / longer


def warmup() -> None:
    """Trigger JIT compilation of the batch kernel on a tiny input."""
    ned_matrix(["ab", ""], ["ba", "abc"])
