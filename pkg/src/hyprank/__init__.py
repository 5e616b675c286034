"""hyprank: exact top-k decoding, beam-search variants, and
hypothesis-ranking metrics for autoregressive sequence models."""

__version__ = "0.1.0"

from .editdist import BACKEND, edit_distance
from .model import (
    CondModel,
    Scenario,
    Vocab,
    load_scenario,
    next_logprobs,
    random_model,
    random_scenario,
    sequence_logprob,
    validate_model,
)
from .quality import QualityFn, chrf, make_utility, quality, sentence_bleu
from .ranking import (
    EditRankReport,
    RankedArrays,
    build_ranked_arrays,
    edit_count,
    edit_rank,
    edit_rank_histogram,
    krg,
    kqrg,
    random_krg_baseline,
)
from .search import (
    BoundedTopK,
    Hypothesis,
    SearchConfig,
    SearchStats,
    ancestral_sample,
    beam_search,
    brute_force,
    exact_top_k,
    length_normalized_score,
    mbr_decode,
    min_heap_beam_search,
)

__all__ = [
    "BACKEND",
    "BoundedTopK",
    "CondModel",
    "EditRankReport",
    "Hypothesis",
    "QualityFn",
    "RankedArrays",
    "Scenario",
    "SearchConfig",
    "SearchStats",
    "Vocab",
    "ancestral_sample",
    "beam_search",
    "brute_force",
    "build_ranked_arrays",
    "chrf",
    "edit_count",
    "edit_distance",
    "edit_rank",
    "edit_rank_histogram",
    "exact_top_k",
    "krg",
    "kqrg",
    "length_normalized_score",
    "load_scenario",
    "make_utility",
    "mbr_decode",
    "min_heap_beam_search",
    "next_logprobs",
    "quality",
    "random_krg_baseline",
    "random_model",
    "random_scenario",
    "sentence_bleu",
    "sequence_logprob",
    "validate_model",
]
