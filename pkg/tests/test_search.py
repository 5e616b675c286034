import math
import random
from collections import Counter

import pytest

from hyprank.errors import BudgetExceededError, SpaceTooLargeError
from hyprank.model import next_logprobs, random_model
from hyprank.quality import QualityFn, make_utility
from hyprank.search import (
    BoundedTopK,
    Hypothesis,
    SearchStats,
    ancestral_sample,
    beam_search,
    brute_force,
    exact_top_k,
    length_normalized_score,
    mbr_decode,
    min_heap_beam_search,
)

SUITE = [
    random_model(seed, vocab_size=3 + seed % 3, order=seed % 3, max_len=4 + seed % 3, eos_floor=0.1)
    for seed in range(50)
]


def greedy_decode(model, source_id):
    prefix = ()
    lp = 0.0
    while True:
        logps = next_logprobs(model, source_id, prefix)
        if len(prefix) == model.max_len:
            v = model.eos_id
        else:
            v = max(range(model.vocab_size), key=lambda t: (logps[t], -t))
        lp += logps[v]
        prefix += (v,)
        if v == model.eos_id:
            return prefix, lp


class TestBruteForce:
    def test_tiny_space_listing(self):
        model = random_model(0, vocab_size=2, order=0, max_len=2, eos_floor=0.3)
        seqs = {h.tokens for h in brute_force(model, "s0")}
        assert seqs == {(0,), (1, 0), (1, 1, 0)}
        forced = {h.tokens: h.forced_eos for h in brute_force(model, "s0")}
        assert forced == {(0,): False, (1, 0): False, (1, 1, 0): True}

    def test_cap(self):
        model = random_model(0, vocab_size=5, order=0, max_len=15, eos_floor=0.3)
        with pytest.raises(SpaceTooLargeError, match="space too large for oracle"):
            brute_force(model, "s0")

    def test_top1_matches_exact(self):
        for model in SUITE:
            assert brute_force(model, "s0", 1)[0] == exact_top_k(model, "s0", 1)[0]


class TestExactTopK:
    def test_pathology_mode(self, pathology_model):
        top = exact_top_k(pathology_model, "s1", 1)
        assert top[0].tokens == (0,)
        assert top[0].logprob == pytest.approx(math.log(0.45))

    def test_oracle_equivalence(self):
        for model in SUITE:
            exact = exact_top_k(model, "s0", 5)
            oracle = brute_force(model, "s0", 5)
            assert [h.tokens for h in exact] == [h.tokens for h in oracle]
            for a, b in zip(exact, oracle):
                assert a.logprob == pytest.approx(b.logprob)

    def test_initial_bounds_shrink_search(self):
        for model in SUITE[:20]:
            bounds = min_heap_beam_search(model, "s0", 8, 5)
            s_plain, s_bounded = SearchStats(), SearchStats()
            plain = exact_top_k(model, "s0", 5, stats=s_plain)
            seeded = exact_top_k(model, "s0", 5, initial_bounds=bounds, stats=s_bounded)
            assert [h.tokens for h in plain] == [h.tokens for h in seeded]
            assert s_bounded.nodes <= s_plain.nodes

    def test_bound_monotonicity(self):
        for model in SUITE[:20]:
            stats = SearchStats()
            exact_top_k(model, "s0", 5, stats=stats)
            finite = [b for b in stats.bound_history if b != float("-inf")]
            assert finite == sorted(finite)

    def test_pruning_soundness(self):
        # nothing scoring at least the final bound is missing from the output
        for model in SUITE[:20]:
            top = exact_top_k(model, "s0", 5)
            gamma = top[-1].logprob
            kept = {h.tokens for h in top}
            for h in brute_force(model, "s0"):
                if h.logprob > gamma:
                    assert h.tokens in kept

    def test_budget_abort(self):
        model = random_model(1, vocab_size=5, order=1, max_len=6, eos_floor=0.1)
        with pytest.raises(BudgetExceededError, match="search budget exceeded"):
            exact_top_k(model, "s0", 5, budget=10)

    def test_greedy_order_flag_is_correctness_neutral(self):
        for model in SUITE[:10]:
            a = exact_top_k(model, "s0", 5, greedy_order=True)
            b = exact_top_k(model, "s0", 5, greedy_order=False)
            assert a == b

    def test_small_space_returns_all(self):
        model = random_model(0, vocab_size=2, order=0, max_len=2, eos_floor=0.3)
        assert len(exact_top_k(model, "s0", 10)) == 3


class TestBeamSearch:
    def test_b1_is_greedy(self):
        for model in SUITE[:20]:
            expected_tokens, expected_lp = greedy_decode(model, "s0")
            got = beam_search(model, "s0", 1, 1)[0]
            assert got.tokens == expected_tokens
            assert got.logprob == pytest.approx(expected_lp)

    def test_pathology_prunes_empty_hypothesis(self, pathology_model):
        got = beam_search(pathology_model, "s1", 1, 1)[0]
        assert got.tokens == (1, 0)
        assert got.logprob == pytest.approx(math.log(0.275))

    def test_exhaustive_breadth_equals_brute_force(self):
        model = random_model(9, vocab_size=3, order=1, max_len=4, eos_floor=0.1)
        assert beam_search(model, "s0", 128, 5) == brute_force(model, "s0", 5)


class TestMinHeapBeamSearch:
    def test_pathology_recovers_empty_hypothesis(self, pathology_model):
        got = min_heap_beam_search(pathology_model, "s1", 1, 1)[0]
        assert got.tokens == (0,)
        assert got.logprob == pytest.approx(math.log(0.45))

    @pytest.mark.parametrize("b", [1, 2, 4, 8])
    def test_heap_dominance(self, b):
        for model in SUITE:
            k = min(b, 3)
            heap_out = min_heap_beam_search(model, "s0", b, k)
            beam_out = beam_search(model, "s0", b, k)
            for h, p in zip(heap_out, beam_out):
                assert h.logprob >= p.logprob - 1e-12

    def test_exhaustive_breadth_equals_brute_force(self):
        model = random_model(9, vocab_size=3, order=1, max_len=4, eos_floor=0.1)
        assert min_heap_beam_search(model, "s0", 128, 5) == brute_force(model, "s0", 5)


class TestBoundedTopK:
    def test_capacity_and_bound(self):
        heap = BoundedTopK(2)
        assert heap.bound == float("-inf")
        heap.push(Hypothesis((1, 0), -2.0))
        heap.push(Hypothesis((2, 0), -1.0))
        assert heap.bound == -2.0
        heap.push(Hypothesis((3, 0), -0.5))
        assert heap.bound == -1.0
        assert [h.tokens for h in heap.items()] == [(3, 0), (2, 0)]

    def test_tie_keeps_lexicographically_smaller(self):
        heap = BoundedTopK(1)
        heap.push(Hypothesis((2, 0), -1.0))
        heap.push(Hypothesis((1, 0), -1.0))
        assert heap.items()[0].tokens == (1, 0)


class TestAncestralSample:
    def test_deterministic_path_model(self):
        model = random_model(0, vocab_size=3, order=0, max_len=4, eos_floor=0.2)
        model.table[("s0", ())] = (0.0, 1.0, 0.0)
        model._log_cache.clear()
        # only path: four 1-tokens then forced EOS
        samples = ancestral_sample(model, "s0", 20, seed=3)
        assert all(h.tokens == (1, 1, 1, 1, 0) for h in samples)
        assert all(h.forced_eos for h in samples)

    def test_same_seed_identical(self, pathology_model):
        a = ancestral_sample(pathology_model, "s1", 500, seed=11)
        b = ancestral_sample(pathology_model, "s1", 500, seed=11)
        assert a == b

    def test_empirical_frequency(self, pathology_model):
        samples = ancestral_sample(pathology_model, "s1", 100_000, seed=5)
        freq = Counter(h.tokens for h in samples)
        assert freq[(0,)] / 100_000 == pytest.approx(0.45, abs=0.01)


class TestMBR:
    def _hyp(self, tokens, lp=0.0):
        return Hypothesis(tuple(tokens), lp)

    def test_single_sample(self):
        h = self._hyp((1, 0), -1.0)
        assert mbr_decode([h], make_utility(QualityFn("edit_neg"))) is h

    def test_majority_wins_under_neg_edit(self):
        a = self._hyp((1, 2, 0), -1.0)
        b = self._hyp((3, 0), -0.5)
        utility = make_utility(QualityFn("edit_neg"))
        assert mbr_decode([a, a, b], utility).tokens == a.tokens

    def test_all_identical(self):
        a = self._hyp((1, 0), -1.0)
        assert mbr_decode([a, a, a], make_utility(QualityFn("edit_neg"))) == a


class TestLengthNormalization:
    def test_alpha_zero_is_raw(self):
        h = Hypothesis((1, 1, 0), -3.0)
        assert length_normalized_score(h, 0.0) == -3.0

    def test_hand_value(self):
        h = Hypothesis((1, 1, 1, 0), -2.0)
        assert length_normalized_score(h, 1.0) == pytest.approx(-0.5)

    def test_rescoring_preserves_set(self):
        model = random_model(4, vocab_size=3, order=1, max_len=4, eos_floor=0.2)
        exact = exact_top_k(model, "s0", 5)
        rescored = sorted(exact, key=lambda h: -length_normalized_score(h, 1.0))
        assert {h.tokens for h in rescored} == {h.tokens for h in exact}
