"""Tabular autoregressive conditional models and scenario loading.

A model assigns, for every (source, context) pair, a probability vector
over the vocabulary.  The context is the last ``order`` generated tokens
(``order=None`` keys rows by the full prefix).  Missing rows fall back to
a uniform distribution, so every prefix is always scorable.

All sequence operations use the forced-EOS convention: a prefix that
reaches ``max_len`` without emitting EOS is terminated by appending EOS
at its stored conditional probability.  Every decoder, sampler, and the
brute-force oracle apply this identically.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .errors import (
    InvalidHypothesisError,
    InvalidModelError,
    InvalidTokenError,
    MalformedScenarioError,
    UnknownSourceError,
)

# Probabilities below this are treated as exact zeros in log space.
PROB_FLOOR = 1e-300
LOG_FLOOR = -700.0

ROW_SUM_TOL = 1e-9
RENORM_TOL = 1e-6


def _log(p: float) -> float:
    if p < PROB_FLOOR:
        return LOG_FLOOR
    return math.log(p)


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    eos_id: int

    def __post_init__(self):
        if len(self.tokens) < 2:
            raise ValueError("vocabulary needs at least 2 tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        if any(not t for t in self.tokens):
            raise ValueError("vocabulary tokens must be non-empty")
        if not 0 <= self.eos_id < len(self.tokens):
            raise ValueError("eos_id out of range")

    @property
    def size(self) -> int:
        return len(self.tokens)

    def to_ids(self, tokens) -> tuple[int, ...]:
        index = {t: i for i, t in enumerate(self.tokens)}
        out = []
        for t in tokens:
            if t not in index:
                raise InvalidTokenError(t)
            out.append(index[t])
        return tuple(out)

    def to_strings(self, ids) -> tuple[str, ...]:
        for i in ids:
            if not 0 <= i < self.size:
                raise InvalidTokenError(i)
        return tuple(self.tokens[i] for i in ids)


@dataclass
class CondModel:
    """Conditional token distribution table.

    table maps (source_id, context token tuple) -> probability tuple of
    length vocab_size.  order=None means the full prefix is the context.
    """

    vocab_size: int
    eos_id: int
    order: int | None
    max_len: int
    table: dict
    sources: frozenset
    backoff: str = "uniform"
    _log_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def context_key(self, prefix) -> tuple:
        if self.order is None:
            return tuple(prefix)
        if self.order == 0:
            return ()
        return tuple(prefix[-self.order:])

    def probs_row(self, source_id, prefix) -> tuple[float, ...]:
        if source_id not in self.sources:
            raise UnknownSourceError(source_id)
        row = self.table.get((source_id, self.context_key(prefix)))
        if row is None:
            u = 1.0 / self.vocab_size
            return (u,) * self.vocab_size
        return row

    def logprobs_row(self, source_id, prefix) -> tuple[float, ...]:
        if source_id not in self.sources:
            raise UnknownSourceError(source_id)
        key = (source_id, self.context_key(prefix))
        cached = self._log_cache.get(key)
        if cached is None:
            row = self.table.get(key)
            if row is None:
                lp = _log(1.0 / self.vocab_size)
                cached = (lp,) * self.vocab_size
            else:
                cached = tuple(_log(p) for p in row)
            self._log_cache[key] = cached
        return cached


def next_logprobs(model: CondModel, source_id, prefix) -> tuple[float, ...]:
    """Log-distribution over the next token given a prefix.

    The prefix may be as long as max_len so that the forced final EOS can
    be scored at its stored conditional probability.
    """
    for t in prefix:
        if not isinstance(t, int) or not 0 <= t < model.vocab_size:
            raise InvalidTokenError(t)
        if t == model.eos_id:
            raise InvalidTokenError(t)
    if len(prefix) > model.max_len:
        raise ValueError("prefix longer than max_len")
    return model.logprobs_row(source_id, prefix)


def sequence_logprob(model: CondModel, source_id, tokens) -> float:
    """Log-probability of a complete (EOS-terminated) sequence."""
    tokens = tuple(tokens)
    if not tokens:
        raise InvalidHypothesisError("empty sequence")
    if tokens[-1] != model.eos_id:
        raise InvalidHypothesisError("missing terminal EOS")
    if model.eos_id in tokens[:-1]:
        raise InvalidHypothesisError("interior EOS")
    if len(tokens) > model.max_len + 1:
        raise InvalidHypothesisError("longer than max_len + 1")
    total = 0.0
    for i, tok in enumerate(tokens):
        if not isinstance(tok, int) or not 0 <= tok < model.vocab_size:
            raise InvalidHypothesisError(f"token out of vocabulary: {tok!r}")
        total += model.logprobs_row(source_id, tokens[:i])[tok]
    return total


def validate_model(model: CondModel) -> list[str]:
    """Check every stored row; return human-readable violations."""
    violations = []
    for (source_id, ctx), row in model.table.items():
        where = f"source={source_id!r} context={ctx!r}"
        if len(row) != model.vocab_size:
            violations.append(f"{where}: row length {len(row)} != {model.vocab_size}")
            continue
        if any(p < 0 for p in row):
            violations.append(f"{where}: negative probability")
            continue
        s = math.fsum(row)
        if abs(s - 1.0) > ROW_SUM_TOL:
            violations.append(f"{where}: row sums to {s!r}")
    if model.max_len < 1:
        violations.append(f"max_len={model.max_len} < 1")
    return violations


@dataclass(frozen=True)
class Scenario:
    vocab: Vocab
    model: CondModel
    sources: tuple  # of (source_id, text)
    references: dict  # source_id -> token-id tuple (no EOS)

    @property
    def source_ids(self):
        return [sid for sid, _ in self.sources]


def load_scenario(data) -> Scenario:
    """Parse and validate a scenario document (JSON text or bytes)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedScenarioError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise MalformedScenarioError("top-level object expected")
    try:
        vocab_doc = doc["vocab"]
        tokens = tuple(str(t) for t in vocab_doc["tokens"])
        eos_token = vocab_doc["eos"]
        model_doc = doc["model"]
        order = model_doc["order"]
        max_len = int(model_doc["max_len"])
        backoff = model_doc.get("backoff", "uniform")
        rows = model_doc["rows"]
        sources = tuple((str(s["id"]), str(s.get("text", ""))) for s in doc["sources"])
        references = doc.get("references", {})
    except (KeyError, TypeError) as exc:
        raise MalformedScenarioError(str(exc)) from exc

    if eos_token not in tokens:
        raise MalformedScenarioError(f"eos token {eos_token!r} not in vocabulary")
    try:
        vocab = Vocab(tokens=tokens, eos_id=tokens.index(eos_token))
    except ValueError as exc:
        raise MalformedScenarioError(str(exc)) from exc

    if order == "full":
        order = None
    elif not isinstance(order, int) or order < 0:
        raise MalformedScenarioError(f"bad order: {order!r}")
    if backoff != "uniform":
        raise MalformedScenarioError(f"unsupported backoff: {backoff!r}")

    index = {t: i for i, t in enumerate(tokens)}
    source_ids = frozenset(sid for sid, _ in sources)
    violations = []
    table = {}
    for row in rows:
        try:
            sid = str(row["source"])
            ctx_tokens = row["context"]
            probs = [float(p) for p in row["probs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedScenarioError(str(exc)) from exc
        if sid not in source_ids:
            violations.append(f"row for unknown source {sid!r}")
            continue
        try:
            ctx = tuple(index[t] for t in ctx_tokens)
        except KeyError as exc:
            violations.append(f"source={sid!r}: unknown context token {exc.args[0]!r}")
            continue
        s = math.fsum(probs)
        if probs and all(p >= 0 for p in probs) and 0 < abs(s - 1.0) <= RENORM_TOL:
            probs = [p / s for p in probs]
        table[(sid, ctx)] = tuple(probs)

    model = CondModel(
        vocab_size=vocab.size,
        eos_id=vocab.eos_id,
        order=order,
        max_len=max_len,
        table=table,
        sources=source_ids,
        backoff="uniform",
    )
    violations.extend(validate_model(model))

    refs = {}
    for sid, ref_tokens in references.items():
        if sid not in source_ids:
            violations.append(f"reference for unknown source {sid!r}")
            continue
        try:
            ids = vocab.to_ids(ref_tokens)
        except InvalidTokenError as exc:
            violations.append(f"reference for {sid!r}: out-of-vocab token {exc.token!r}")
            continue
        if vocab.eos_id in ids:
            violations.append(f"reference for {sid!r} contains EOS")
            continue
        refs[sid] = ids

    if violations:
        raise InvalidModelError(violations)
    return Scenario(vocab=vocab, model=model, sources=sources, references=refs)


def _all_contexts(non_eos: list[int], order: int):
    contexts = [()]
    frontier = [()]
    for _ in range(order):
        frontier = [ctx + (t,) for ctx in frontier for t in non_eos]
        contexts.extend(frontier)
    return contexts


def random_model(
    seed: int,
    vocab_size: int,
    order: int,
    max_len: int,
    eos_floor: float,
    n_sources: int = 1,
) -> CondModel:
    """Deterministic random tabular model for test suites.

    Every context's EOS probability is at least eos_floor, which bounds
    the expected sequence length and keeps enumeration finite in mass.
    """
    if vocab_size < 2:
        raise ValueError("vocab_size must be >= 2")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if not 0 < eos_floor < 1:
        raise ValueError("eos_floor must be in (0, 1)")
    rng = random.Random(seed)
    eos_id = 0
    non_eos = [i for i in range(vocab_size) if i != eos_id]
    sources = [f"s{i}" for i in range(n_sources)]
    table = {}
    for sid in sources:
        for ctx in _all_contexts(non_eos, order):
            p_eos = eos_floor + rng.random() * (1.0 - eos_floor) * 0.8
            weights = [rng.random() + 1e-9 for _ in non_eos]
            wsum = sum(weights)
            row = [0.0] * vocab_size
            row[eos_id] = p_eos
            for t, w in zip(non_eos, weights):
                row[t] = (1.0 - p_eos) * w / wsum
            # exact renormalization against accumulated float error
            s = math.fsum(row)
            row = [p / s for p in row]
            table[(sid, ctx)] = tuple(row)
    return CondModel(
        vocab_size=vocab_size,
        eos_id=eos_id,
        order=order,
        max_len=max_len,
        table=table,
        sources=frozenset(sources),
    )


def random_scenario(
    seed: int,
    vocab_size: int = 4,
    order: int = 1,
    max_len: int = 5,
    eos_floor: float = 0.1,
    n_sources: int = 1,
) -> Scenario:
    """Random model wrapped in a Scenario with random references."""
    model = random_model(seed, vocab_size, order, max_len, eos_floor, n_sources)
    rng = random.Random(seed ^ 0x5EED)
    tokens = ("</s>",) + tuple(f"t{i}" for i in range(1, vocab_size))
    vocab = Vocab(tokens=tokens, eos_id=0)
    non_eos = [i for i in range(vocab_size) if i != vocab.eos_id]
    sources = []
    references = {}
    for sid in sorted(model.sources):
        sources.append((sid, f"source {sid}"))
        ref_len = rng.randint(1, max_len)
        references[sid] = tuple(rng.choice(non_eos) for _ in range(ref_len))
    return Scenario(vocab=vocab, model=model, sources=tuple(sources), references=references)
