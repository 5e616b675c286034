"""Decoding algorithms over tabular autoregressive models.

Implements plain beam search, min-heap augmented beam search, depth-first
branch-and-bound exact top-k search, a brute-force enumeration oracle,
ancestral sampling, and sample-based MBR selection.

Tie-breaking is lexicographic by token-id sequence everywhere (decoders
and oracle alike), so set and order comparisons between methods are
well-defined.
"""

from __future__ import annotations

import heapq
import math
import os
import random
from dataclasses import dataclass, field

from .errors import BudgetExceededError, SpaceTooLargeError
from .model import CondModel

NEG_INF = float("-inf")

DEFAULT_BUDGET = int(os.environ.get("HYPRANK_BUDGET", 10_000_000))
ORACLE_CAP = 10_000_000


@dataclass(frozen=True)
class Hypothesis:
    """A complete sequence: token ids ending in a single EOS."""

    tokens: tuple[int, ...]
    logprob: float
    forced_eos: bool = False

    def sort_key(self):
        return (-self.logprob, self.tokens)


@dataclass
class SearchConfig:
    beam_width: int = 4
    k: int = 1
    alpha: float | None = None
    sample_count: int = 200
    seed: int = 0
    budget: int = DEFAULT_BUDGET


@dataclass
class SearchStats:
    """Per-invocation instrumentation: node expansions and bound history."""

    nodes: int = 0
    bound_history: list = field(default_factory=list)


class _HeapEntry:
    """Min-heap ordering: lower logprob is worse; among equal logprobs the
    lexicographically larger token sequence is worse (so the kept set
    matches the oracle's lexicographic tie-break)."""

    __slots__ = ("hyp",)

    def __init__(self, hyp: Hypothesis):
        self.hyp = hyp

    def __lt__(self, other: "_HeapEntry") -> bool:
        a, b = self.hyp, other.hyp
        if a.logprob != b.logprob:
            return a.logprob < b.logprob
        return a.tokens > b.tokens


class BoundedTopK:
    """Capacity-limited min-heap of hypotheses; tracks the running lower
    bound (the minimum stored logprob once full, -inf before)."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._heap: list[_HeapEntry] = []

    def __len__(self):
        return len(self._heap)

    @property
    def bound(self) -> float:
        if len(self._heap) < self.capacity:
            return NEG_INF
        return self._heap[0].hyp.logprob

    def push(self, hyp: Hypothesis) -> None:
        entry = _HeapEntry(hyp)
        if len(self._heap) < self.capacity:
            heapq.heappush(self._heap, entry)
        elif self._heap[0] < entry:
            heapq.heapreplace(self._heap, entry)

    def items(self) -> list[Hypothesis]:
        return sorted((e.hyp for e in self._heap), key=Hypothesis.sort_key)


def length_normalized_score(hyp: Hypothesis, alpha: float) -> float:
    """logprob / |tokens|^alpha; alpha=0 is the raw logprob."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return hyp.logprob / len(hyp.tokens) ** alpha


def _final_sort(finished, k, alpha):
    if alpha is not None:
        key = lambda h: (-length_normalized_score(h, alpha), h.tokens)
    else:
        key = Hypothesis.sort_key
    return sorted(finished, key=key)[:k]


def _beam_core(model: CondModel, source_id, b, k, alpha, stats, heap):
    """Shared beam dynamics.

    When ``heap`` is given (min-heap variant), every EOS-extended
    candidate of the expansion pool is pushed into it before pruning.
    """
    eos = model.eos_id
    max_len = model.max_len
    alive = [((), 0.0)]
    finished: list[Hypothesis] = []
    while alive:
        pool = []
        for prefix, lp in alive:
            logps = model.logprobs_row(source_id, prefix)
            if len(prefix) == max_len:
                candidates = (eos,)
            else:
                candidates = range(model.vocab_size)
            for v in candidates:
                cand = (prefix + (v,), lp + logps[v])
                pool.append(cand)
                if heap is not None and v == eos:
                    heap.push(
                        Hypothesis(cand[0], cand[1], forced_eos=len(prefix) == max_len)
                    )
        if stats is not None:
            stats.nodes += len(pool)
        pool.sort(key=lambda c: (-c[1], c[0]))
        new_alive = []
        for i, (prefix, lp) in enumerate(pool):
            if prefix[-1] == eos:
                if i < b:
                    finished.append(
                        Hypothesis(prefix, lp, forced_eos=len(prefix) == max_len + 1)
                    )
                # an EOS candidate outside the top-b is pruned outright
            elif len(new_alive) < b:
                new_alive.append((prefix, lp))
        alive = new_alive
        # early stop: no alive prefix can beat the k-th finished hypothesis
        if alive and len(finished) >= k:
            kth = sorted(finished, key=Hypothesis.sort_key)[k - 1].logprob
            if max(lp for _, lp in alive) < kth:
                break
    return finished


def beam_search(
    model: CondModel,
    source_id,
    b: int,
    k: int,
    alpha: float | None = None,
    stats: SearchStats | None = None,
) -> list[Hypothesis]:
    """Standard beam search; returns the top k finished hypotheses."""
    if not b >= k >= 1:
        raise ValueError("need b >= k >= 1")
    finished = _beam_core(model, source_id, b, k, alpha, stats, heap=None)
    return _final_sort(finished, k, alpha)


def min_heap_beam_search(
    model: CondModel,
    source_id,
    b: int,
    k: int,
    alpha: float | None = None,
    stats: SearchStats | None = None,
) -> list[Hypothesis]:
    """Beam search with a capacity-b min-heap capturing every EOS-ending
    expansion candidate; the heap contents replace the beam's own
    finished list."""
    if not b >= k >= 1:
        raise ValueError("need b >= k >= 1")
    heap = BoundedTopK(b)
    _beam_core(model, source_id, b, k, alpha, stats, heap=heap)
    return _final_sort(heap.items(), k, alpha)


def exact_top_k(
    model: CondModel,
    source_id,
    k: int,
    initial_bounds: list[Hypothesis] | None = None,
    budget: int = DEFAULT_BUDGET,
    greedy_order: bool = True,
    stats: SearchStats | None = None,
) -> list[Hypothesis]:
    """Depth-first branch-and-bound search for the exact top-k hypotheses.

    A bounded min-heap of finished hypotheses maintains the pruning lower
    bound; branches whose accumulated logprob falls below it are cut.
    ``initial_bounds`` (e.g. a beam search result) seeds the bound to
    shrink the explored tree without changing the result.  Children are
    visited in descending conditional probability when ``greedy_order``
    is set, which tightens the bound sooner.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    eos = model.eos_id
    max_len = model.max_len
    heap = BoundedTopK(k)
    init_gamma = NEG_INF
    if initial_bounds and len(initial_bounds) >= k:
        init_gamma = sorted(initial_bounds, key=Hypothesis.sort_key)[k - 1].logprob
    nodes = 0

    def visit(prefix, lp):
        nonlocal nodes
        gamma = max(init_gamma, heap.bound)
        logps = model.logprobs_row(source_id, prefix)
        if len(prefix) == max_len:
            candidates = [eos]
        elif greedy_order:
            candidates = sorted(range(model.vocab_size), key=logps.__getitem__, reverse=True)
        else:
            candidates = range(model.vocab_size)
        for v in candidates:
            p2 = lp + logps[v]
            gamma = max(init_gamma, heap.bound)
            if p2 < gamma:
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(budget)
            if v == eos:
                heap.push(
                    Hypothesis(prefix + (v,), p2, forced_eos=len(prefix) == max_len)
                )
                if stats is not None:
                    stats.bound_history.append(heap.bound)
            else:
                visit(prefix + (v,), p2)

    visit((), 0.0)
    if stats is not None:
        stats.nodes += nodes
    return heap.items()[:k]


def brute_force(
    model: CondModel,
    source_id,
    k: int | None = None,
    cap: int = ORACLE_CAP,
) -> list[Hypothesis]:
    """Enumerate the whole hypothesis space and rank it (oracle)."""
    if model.vocab_size ** model.max_len > cap:
        raise SpaceTooLargeError(model.vocab_size ** model.max_len, cap)
    eos = model.eos_id
    max_len = model.max_len
    results: list[Hypothesis] = []

    def enumerate_from(prefix, lp):
        logps = model.logprobs_row(source_id, prefix)
        forced = len(prefix) == max_len
        results.append(Hypothesis(prefix + (eos,), lp + logps[eos], forced_eos=forced))
        if not forced:
            for v in range(model.vocab_size):
                if v != eos:
                    enumerate_from(prefix + (v,), lp + logps[v])

    enumerate_from((), 0.0)
    results.sort(key=Hypothesis.sort_key)
    if k is None:
        return results
    return results[:k]


def ancestral_sample(
    model: CondModel, source_id, n: int, seed: int
) -> list[Hypothesis]:
    """Draw n sequences token-by-token from the model's conditionals."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    eos = model.eos_id
    max_len = model.max_len
    token_ids = range(model.vocab_size)
    out = []
    for _ in range(n):
        prefix = ()
        lp = 0.0
        forced = False
        while True:
            logps = model.logprobs_row(source_id, prefix)
            if len(prefix) == max_len:
                v = eos
                forced = True
            else:
                probs = model.probs_row(source_id, prefix)
                v = rng.choices(token_ids, weights=probs)[0]
            lp += logps[v]
            prefix += (v,)
            if v == eos:
                break
        out.append(Hypothesis(prefix, lp, forced_eos=forced))
    return out


def mbr_decode(samples: list[Hypothesis], utility) -> Hypothesis:
    """Pick the sample maximizing mean pairwise utility over all samples.

    ``utility(y_tokens, y_j_tokens) -> float``; ties broken by higher
    model logprob, then lexicographic token order.
    """
    if not samples:
        raise ValueError("samples must be non-empty")
    candidates = {}
    for h in samples:
        candidates.setdefault(h.tokens, h)
    n = len(samples)
    best = None
    best_key = None
    for h in candidates.values():
        score = math.fsum(utility(h.tokens, s.tokens) for s in samples) / n
        key = (-score, -h.logprob, h.tokens)
        if best_key is None or key < best_key:
            best, best_key = h, key
    return best
