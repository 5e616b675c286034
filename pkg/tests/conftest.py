import json
import pathlib

import pytest

from hyprank.model import CondModel, Scenario, Vocab

DATA_DIR = pathlib.Path(__file__).parent / "data"


def make_model(rows, vocab_size, max_len, order=None, sources=None):
    """Build a CondModel from {(source, context): probs} rows; eos id 0."""
    if sources is None:
        sources = {sid for sid, _ in rows}
    return CondModel(
        vocab_size=vocab_size,
        eos_id=0,
        order=order,
        max_len=max_len,
        table={k: tuple(v) for k, v in rows.items()},
        sources=frozenset(sources),
    )


@pytest.fixture
def pathology_model():
    """EOS-pruning pathology: the empty hypothesis is the mode, but plain
    beam search with b=1 discards it at the first step."""
    rows = {
        ("s1", ()): (0.45, 0.55),
        ("s1", (1,)): (0.5, 0.5),
    }
    return make_model(rows, vocab_size=2, max_len=2, order=1)


@pytest.fixture
def pathology_scenario(pathology_model):
    vocab = Vocab(tokens=("</s>", "a"), eos_id=0)
    return Scenario(
        vocab=vocab,
        model=pathology_model,
        sources=(("s1", "pathology"),),
        references={"s1": (1,)},
    )


@pytest.fixture
def example_scenario_bytes():
    return (DATA_DIR / "example_scenario.json").read_bytes()


@pytest.fixture
def example_scenario_path():
    return str(DATA_DIR / "example_scenario.json")


def scenario_doc():
    """The shipped example scenario as a plain dict (hand-checked rows)."""
    return {
        "vocab": {"tokens": ["</s>", "a", "b", "c"], "eos": "</s>"},
        "model": {
            "order": 1,
            "max_len": 3,
            "backoff": "uniform",
            "rows": [
                {"source": "s1", "context": [], "probs": [0.4, 0.3, 0.2, 0.1]},
                {"source": "s1", "context": ["a"], "probs": [0.5, 0.2, 0.2, 0.1]},
                {"source": "s1", "context": ["b"], "probs": [0.25, 0.25, 0.25, 0.25]},
                {"source": "s2", "context": [], "probs": [0.1, 0.6, 0.2, 0.1]},
                {"source": "s2", "context": ["a"], "probs": [0.7, 0.1, 0.1, 0.1]},
            ],
        },
        "sources": [
            {"id": "s1", "text": "alpha"},
            {"id": "s2", "text": "beta"},
        ],
        "references": {"s1": ["a", "b"], "s2": ["a"]},
    }


@pytest.fixture
def example_doc():
    return scenario_doc()
