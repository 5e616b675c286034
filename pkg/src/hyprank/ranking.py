"""Hypothesis-ranking metrics.

Given a set of hypotheses for one source, two orderings are compared:
the quality-sorted order (the ideal ranking) and the model-probability
order.  kRG is an nDCG-style ratio over positional relevances
f(y) = k - rank_in_quality_order; kQRG discounts the raw quality values
and normalizes by the all-ones upper bound.

Edit-distance rank estimation counts, in exact integer arithmetic, how
many sequences lie at each edit distance from the reference and places a
hypothesis as a percentile of that space.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .editdist import edit_distance
from .errors import DuplicateHypothesisError, EmptyReferenceError, QualityRangeError
from .quality import QualityFn, quality, strip_eos
from .search import Hypothesis


@dataclass(frozen=True)
class RankedArrays:
    hyps: tuple[Hypothesis, ...]
    qualities: tuple[float, ...]
    hr_order: tuple[int, ...]  # indices sorted by quality descending
    model_order: tuple[int, ...]  # indices sorted by logprob descending
    quality_kind: str

    @property
    def k(self) -> int:
        return len(self.hyps)


def build_ranked_arrays(hyps, ref, fn: QualityFn, vocab=None) -> RankedArrays:
    """Compute qualities and both orderings for a hypothesis set.

    Quality ties are broken by higher logprob, then lexicographic token
    order; model-probability ties lexicographically.
    """
    hyps = tuple(hyps)
    if not hyps:
        raise ValueError("hyps must be non-empty")
    if len({h.tokens for h in hyps}) != len(hyps):
        raise DuplicateHypothesisError()
    qualities = tuple(quality(fn, h.tokens, ref, vocab) for h in hyps)
    idx = range(len(hyps))
    hr_order = tuple(
        sorted(idx, key=lambda i: (-qualities[i], -hyps[i].logprob, hyps[i].tokens))
    )
    model_order = tuple(sorted(idx, key=lambda i: (-hyps[i].logprob, hyps[i].tokens)))
    return RankedArrays(hyps, qualities, hr_order, model_order, fn.kind)


def _discount(j: int) -> float:
    # 1-based position j
    return math.log2(j + 1)


def krg(arrays: RankedArrays) -> float:
    """Ranked-gains ratio: DCG of the model order over DCG of the ideal
    order, with relevance k - (position in the ideal order)."""
    k = arrays.k
    pos_in_hr = {idx: pos for pos, idx in enumerate(arrays.hr_order)}
    num = math.fsum(
        (k - pos_in_hr[idx]) / _discount(j + 1)
        for j, idx in enumerate(arrays.model_order)
    )
    den = math.fsum((k - j) / _discount(j + 1) for j in range(k))
    return num / den


def kqrg(arrays: RankedArrays) -> float:
    """Quality-weighted ranked gains, normalized by the all-ones upper
    bound.  Requires a [0, 1]-bounded quality kind."""
    if arrays.quality_kind not in ("edit_sim", "chrf", "sentence_bleu"):
        raise QualityRangeError()
    if any(not 0.0 <= q <= 1.0 for q in arrays.qualities):
        raise QualityRangeError()
    k = arrays.k
    num = math.fsum(
        arrays.qualities[idx] / _discount(j + 1)
        for j, idx in enumerate(arrays.model_order)
    )
    den = math.fsum(1.0 / _discount(j + 1) for j in range(k))
    return num / den


def _comb(n: int, r: int) -> int:
    if r < 0 or n < 0 or n < r:
        return 0
    return math.comb(n, r)


def edit_count(e: int, T: int, V: int) -> int:
    """Number of sequences at edit distance e from a length-T reference
    over a size-V vocabulary (exact integer arithmetic)."""
    if e < 0 or T < 1 or V < 1:
        raise ValueError("need e >= 0, T >= 1, V >= 1")
    v_pow = V**e
    return sum(_comb(T, s) * _comb(T + e - 2 * s, e - s) * v_pow for s in range(T + 1))


@dataclass(frozen=True)
class EditRankReport:
    e: int
    T: int
    count_below: int
    total: int

    @property
    def percentile(self) -> Fraction:
        return Fraction(self.count_below, self.total)

    @property
    def decile(self) -> int:
        return int(10 * self.percentile)


def edit_rank(y, ref, V: int, max_len: int, eos_id: int | None = None) -> EditRankReport:
    """Estimated rank of y in the edit-distance-ordered space around ref.

    The space is truncated at E_max = |ref| + max_len edits (delete the
    whole reference, insert up to the decoder's maximum length).
    """
    if eos_id is not None:
        y = strip_eos(y, eos_id)
        ref = strip_eos(ref, eos_id)
    ref = tuple(ref)
    if not ref:
        raise EmptyReferenceError()
    e = edit_distance(tuple(y), ref)
    T = len(ref)
    e_max = T + max_len
    counts = [edit_count(i, T, V) for i in range(e_max + 1)]
    return EditRankReport(e=e, T=T, count_below=sum(counts[:e]), total=sum(counts))


def edit_rank_histogram(reports) -> list[int]:
    """Counts of reports per decile bucket (10 buckets)."""
    buckets = [0] * 10
    for r in reports:
        buckets[r.decile] += 1
    return buckets


def _perm_krg(perm, k: int, perfect: float) -> float:
    # hr_order is the identity; perm is the model order over hr positions
    num = math.fsum((k - p) / _discount(j + 1) for j, p in enumerate(perm))
    return num / perfect


def random_krg_baseline(
    k: int, n_perms: int = 100_000, seed: int = 0, exhaustive: bool = False
) -> float:
    """Mean kRG of uniformly random model orders against a fixed ideal
    order.  Exhaustive mode averages all k! permutations (k <= 6)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    perfect = math.fsum((k - j) / _discount(j + 1) for j in range(k))
    if exhaustive:
        if k > 6:
            raise ValueError("exhaustive mode supports k <= 6 only")
        perms = itertools.permutations(range(k))
        vals = [_perm_krg(p, k, perfect) for p in perms]
        return math.fsum(vals) / len(vals)
    if n_perms < 1:
        raise ValueError("n_perms must be >= 1")
    rng = random.Random(seed)
    base = list(range(k))
    total = 0.0
    for _ in range(n_perms):
        perm = base[:]
        rng.shuffle(perm)
        total += _perm_krg(perm, k, perfect)
    return total / n_perms
