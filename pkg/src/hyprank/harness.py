"""Experiment pipelines over whole scenarios.

Everything here is a composition of the decoders and metrics: mode/search
error statistics, beam-rank positions, beam-curse tracking, and the two
corpus evaluations (top region and Monte Carlo sampling).

Per-source sampling seeds are derived from (seed, source_id), and corpus
aggregation runs over records sorted by source id, so results never
depend on the order sources appear in.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .errors import BudgetExceededError
from .quality import QualityFn, quality
from .ranking import (
    EditRankReport,
    build_ranked_arrays,
    edit_rank,
    edit_rank_histogram,
    krg,
    kqrg,
)
from .search import (
    DEFAULT_BUDGET,
    SearchStats,
    ancestral_sample,
    beam_search,
    exact_top_k,
    min_heap_beam_search,
)

# Explicit sentinel for "beam output not in the exact top-k list".
NOT_FOUND = "not_found"

METHODS = ("beam", "heap-beam", "exact")


@dataclass
class SearchComparison:
    source_id: str
    exact_mode: tuple[int, ...]
    top1: dict  # method -> token tuple
    mode_match: dict  # method -> bool
    nodes: dict  # method -> node expansions


@dataclass
class CurseRecord:
    source_id: str
    beam_sizes: tuple[int, ...]
    qualities: tuple[float, ...]  # top-1 quality per beam size
    better_count: int
    worse_count: int
    equal_count: int

    @property
    def net_change(self) -> int:
        return self.better_count - self.worse_count


@dataclass
class SentenceRecord:
    source_id: str
    k: int
    krg: float
    kqrg: float
    duplicates: int = 0
    edit_reports: tuple[EditRankReport, ...] = ()


@dataclass
class CorpusSummary:
    records: list[SentenceRecord]
    mean_krg: float
    mean_kqrg: float
    empty_mode_rate: float | None
    excluded: list[str] = field(default_factory=list)
    decile_histogram: list[int] | None = None


def _source_seed(seed: int, source_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}|{source_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _mean(values) -> float:
    values = list(values)
    if not values:
        return float("nan")
    return math.fsum(values) / len(values)


def _top1(scenario, method, source_id, b, budget, stats=None):
    model = scenario.model
    if method == "beam":
        return beam_search(model, source_id, b, 1, stats=stats)[0].tokens
    if method == "heap-beam":
        return min_heap_beam_search(model, source_id, b, 1, stats=stats)[0].tokens
    if method == "exact":
        return exact_top_k(model, source_id, 1, budget=budget, stats=stats)[0].tokens
    raise ValueError(f"unknown method: {method!r}")


def exact_mode(scenario, source_id, budget=DEFAULT_BUDGET) -> tuple[int, ...]:
    return exact_top_k(scenario.model, source_id, 1, budget=budget)[0].tokens


def mode_empty_rate(scenario, budget=DEFAULT_BUDGET) -> float:
    """Fraction of sources whose exact mode is the empty hypothesis."""
    empty = (scenario.vocab.eos_id,)
    hits = sum(
        1 for sid in scenario.source_ids if exact_mode(scenario, sid, budget) == empty
    )
    return hits / len(scenario.source_ids)


def search_error_rate(scenario, method, b: int = 4, budget=DEFAULT_BUDGET) -> float:
    """Fraction of sources where the method's top-1 misses the exact mode."""
    errors = 0
    for sid in scenario.source_ids:
        mode = exact_mode(scenario, sid, budget)
        if _top1(scenario, method, sid, b, budget) != mode:
            errors += 1
    return errors / len(scenario.source_ids)


def compare_searches(scenario, b: int, budget=DEFAULT_BUDGET) -> list[SearchComparison]:
    """Per-source top-1 of every method against the exact mode, with node
    counts."""
    out = []
    for sid in scenario.source_ids:
        top1, match, nodes = {}, {}, {}
        stats = SearchStats()
        mode = exact_top_k(scenario.model, sid, 1, budget=budget, stats=stats)[0].tokens
        for method in METHODS:
            s = SearchStats()
            top1[method] = _top1(scenario, method, sid, b, budget, stats=s)
            match[method] = top1[method] == mode
            nodes[method] = s.nodes
        out.append(
            SearchComparison(
                source_id=sid, exact_mode=mode, top1=top1, mode_match=match, nodes=nodes
            )
        )
    return out


def beam_rank_positions(scenario, beam_sizes, k: int, budget=DEFAULT_BUDGET) -> dict:
    """For each source, the 0-based rank of each beam size's top-1 inside
    the exact top-k list, or NOT_FOUND."""
    out = {}
    for sid in scenario.source_ids:
        exact = [h.tokens for h in exact_top_k(scenario.model, sid, k, budget=budget)]
        positions = {}
        for b in beam_sizes:
            top = beam_search(scenario.model, sid, b, 1)[0].tokens
            positions[b] = exact.index(top) if top in exact else NOT_FOUND
        out[sid] = positions
    return out


def beam_curse_track(scenario, beam_sizes, fn: QualityFn):
    """Quality of the beam top-1 across increasing beam sizes, with
    better/worse/equal transition counts and the corpus histogram of net
    changes."""
    beam_sizes = tuple(beam_sizes)
    if len(beam_sizes) < 2:
        raise ValueError("need >= 2 beam sizes")
    records = []
    histogram: dict[int, int] = {}
    for sid in scenario.source_ids:
        ref = scenario.references[sid]
        quals = []
        for b in beam_sizes:
            top = beam_search(scenario.model, sid, b, 1)[0]
            quals.append(quality(fn, top.tokens, ref, scenario.vocab))
        better = worse = equal = 0
        for prev, cur in zip(quals, quals[1:]):
            if cur > prev:
                better += 1
            elif cur < prev:
                worse += 1
            else:
                equal += 1
        rec = CurseRecord(
            source_id=sid,
            beam_sizes=beam_sizes,
            qualities=tuple(quals),
            better_count=better,
            worse_count=worse,
            equal_count=equal,
        )
        records.append(rec)
        histogram[rec.net_change] = histogram.get(rec.net_change, 0) + 1
    return records, histogram


def _summarize(records, excluded, empty_modes=None, with_histogram=False):
    records = sorted(records, key=lambda r: r.source_id)
    summary = CorpusSummary(
        records=records,
        mean_krg=_mean(r.krg for r in records),
        mean_kqrg=_mean(r.kqrg for r in records),
        empty_mode_rate=empty_modes,
        excluded=sorted(excluded),
    )
    if with_histogram:
        reports = [rep for r in records for rep in r.edit_reports]
        summary.decile_histogram = edit_rank_histogram(reports)
    return summary


def top_region_eval(scenario, k: int, fn: QualityFn, budget=DEFAULT_BUDGET) -> CorpusSummary:
    """Exact top-k per source, ranked-gain metrics, edit-rank reports."""
    records = []
    excluded = []
    empty = (scenario.vocab.eos_id,)
    empty_hits = 0
    for sid in scenario.source_ids:
        try:
            hyps = exact_top_k(scenario.model, sid, k, budget=budget)
        except BudgetExceededError:
            excluded.append(sid)
            continue
        if hyps[0].tokens == empty:
            empty_hits += 1
        ref = scenario.references[sid]
        arrays = build_ranked_arrays(hyps, ref, fn, scenario.vocab)
        reports = tuple(
            edit_rank(
                h.tokens,
                ref,
                V=scenario.vocab.size,
                max_len=scenario.model.max_len,
                eos_id=scenario.vocab.eos_id,
            )
            for h in hyps
        )
        records.append(
            SentenceRecord(
                source_id=sid,
                k=len(hyps),
                krg=krg(arrays),
                kqrg=kqrg(arrays),
                edit_reports=reports,
            )
        )
    included = len(scenario.source_ids) - len(excluded)
    rate = empty_hits / included if included else None
    return _summarize(records, excluded, empty_modes=rate, with_histogram=True)


def sampling_eval(scenario, n_samples: int, seed: int, fn: QualityFn) -> CorpusSummary:
    """Monte Carlo evaluation: sample, deduplicate (keep first), rank."""
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    records = []
    for sid in scenario.source_ids:
        samples = ancestral_sample(
            scenario.model, sid, n_samples, _source_seed(seed, sid)
        )
        distinct = {}
        for h in samples:
            distinct.setdefault(h.tokens, h)
        hyps = list(distinct.values())
        ref = scenario.references[sid]
        arrays = build_ranked_arrays(hyps, ref, fn, scenario.vocab)
        records.append(
            SentenceRecord(
                source_id=sid,
                k=len(hyps),
                krg=krg(arrays),
                kqrg=kqrg(arrays),
                duplicates=n_samples - len(hyps),
            )
        )
    return _summarize(records, excluded=[])
