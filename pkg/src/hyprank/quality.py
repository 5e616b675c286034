"""Sentence-level quality functions Q(y, ref).

Four kinds:

* ``edit_neg``  -- negative Levenshtein distance, in (-inf, 0]
* ``edit_sim``  -- 1 - distance / max(|y|, |ref|), in [0, 1]
* ``chrf``      -- character n-gram F-beta over whitespace-joined tokens
* ``sentence_bleu`` -- smoothed 4-gram BLEU with brevity penalty

Only the [0, 1]-bounded kinds are valid for quality-weighted ranking
gains; ``edit_neg`` is reserved for edit-distance rank estimation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .editdist import edit_distance
from .errors import EmptyReferenceError
from .model import Vocab

BOUNDED_KINDS = ("edit_sim", "chrf", "sentence_bleu")
KINDS = ("edit_neg",) + BOUNDED_KINDS


@dataclass(frozen=True)
class QualityFn:
    kind: str = "edit_sim"
    chrf_order: int = 6
    chrf_beta: float = 2.0
    bleu_eps: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown quality kind: {self.kind!r}")

    @property
    def bounded(self) -> bool:
        return self.kind in BOUNDED_KINDS


def _ngram_counts(seq, n):
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


def chrf(hyp_tokens, ref_tokens, order: int = 6, beta: float = 2.0) -> float:
    """Character n-gram F-beta over the whitespace-joined token strings.

    Orders where both sides have no n-grams are skipped (effective-order
    averaging), so identical strings score exactly 1.0 regardless of
    length.
    """
    hyp = " ".join(str(t) for t in hyp_tokens)
    ref = " ".join(str(t) for t in ref_tokens)
    scores = []
    b2 = beta * beta
    for n in range(1, order + 1):
        hc = _ngram_counts(hyp, n)
        rc = _ngram_counts(ref, n)
        hyp_total = sum(hc.values())
        ref_total = sum(rc.values())
        if hyp_total == 0 and ref_total == 0:
            continue
        matches = sum(min(c, rc[g]) for g, c in hc.items())
        prec = matches / hyp_total if hyp_total else 0.0
        rec = matches / ref_total if ref_total else 0.0
        if prec + rec == 0.0:
            scores.append(0.0)
        else:
            scores.append((1 + b2) * prec * rec / (b2 * prec + rec))
    if not scores:
        return 0.0
    return math.fsum(scores) / len(scores)


def sentence_bleu(hyp_tokens, ref_tokens, eps: float = 0.1) -> float:
    """Sentence BLEU: geometric mean of modified n-gram precisions
    (n = 1..4, additive eps smoothing on zero counts) times the brevity
    penalty.  Orders with no hypothesis n-grams are skipped so that
    y = ref scores exactly 1.0 for short sequences too."""
    hyp = list(hyp_tokens)
    ref = list(ref_tokens)
    if not hyp:
        return 0.0
    log_precs = []
    for n in range(1, 5):
        hc = _ngram_counts(hyp, n)
        total = sum(hc.values())
        if total == 0:
            continue
        rc = _ngram_counts(ref, n)
        matches = sum(min(c, rc[g]) for g, c in hc.items())
        p = matches / total if matches else eps / total
        log_precs.append(math.log(p))
    if not log_precs:
        return 0.0
    gm = math.exp(math.fsum(log_precs) / len(log_precs))
    bp = 1.0 if len(hyp) >= len(ref) else math.exp(1.0 - len(ref) / len(hyp))
    return gm * bp


def strip_eos(tokens, eos_id):
    return tuple(t for t in tokens if t != eos_id)


def quality(fn: QualityFn, y, ref, vocab: Vocab | None = None) -> float:
    """Score hypothesis tokens against reference tokens.

    With ``vocab`` given, both sequences are token ids: EOS is stripped
    and ids are mapped to strings for the string-based metrics.  Without
    it, sequences are used as-is (assumed already EOS-free).
    """
    if vocab is not None:
        y = strip_eos(y, vocab.eos_id)
        ref = strip_eos(ref, vocab.eos_id)
    else:
        y = tuple(y)
        ref = tuple(ref)
    if not ref:
        raise EmptyReferenceError()
    if fn.kind == "edit_neg":
        return -float(edit_distance(y, ref))
    if fn.kind == "edit_sim":
        d = edit_distance(y, ref)
        denom = max(len(y), len(ref))
        if denom == 0:
            return 1.0
        return min(1.0, max(0.0, 1.0 - d / denom))
    if vocab is not None:
        y = vocab.to_strings(y)
        ref = vocab.to_strings(ref)
    if fn.kind == "chrf":
        return chrf(y, ref, order=fn.chrf_order, beta=fn.chrf_beta)
    return sentence_bleu(y, ref, eps=fn.bleu_eps)


def make_utility(fn: QualityFn, vocab: Vocab | None = None):
    """Pairwise utility for MBR: utility(y, pseudo_ref) from a QualityFn.

    Unlike ``quality``, an empty pseudo-reference is allowed for the
    edit-distance kinds: sampled candidates may be the empty sequence.
    """
    eos_id = vocab.eos_id if vocab is not None else None

    def utility(y_tokens, ref_tokens):
        if eos_id is not None:
            y_tokens = strip_eos(y_tokens, eos_id)
            ref_tokens = strip_eos(ref_tokens, eos_id)
        if fn.kind == "edit_neg":
            return -float(edit_distance(y_tokens, ref_tokens))
        if fn.kind == "edit_sim":
            d = edit_distance(y_tokens, ref_tokens)
            denom = max(len(y_tokens), len(ref_tokens))
            return 1.0 if denom == 0 else min(1.0, max(0.0, 1.0 - d / denom))
        return quality(fn, y_tokens, ref_tokens, vocab)

    return utility
