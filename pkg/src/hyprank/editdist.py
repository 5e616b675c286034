"""Levenshtein edit distance with a compiled kernel when available.

The compiled extension is selected at import time; the pure-Python
implementation in ``_editdist_py`` is the fallback and the reference for
tests.  ``BACKEND`` records which one is active.
"""

try:
    from ._editdist import levenshtein_ids

    BACKEND = "cython"
except ImportError:  # extension not built, e.g. source checkout
    from ._editdist_py import levenshtein_ids

    BACKEND = "python"


def edit_distance(a, b) -> int:
    """Unit-cost Levenshtein distance between two sequences.

    Elements may be any hashables; they are interned to ints before the
    kernel runs.
    """
    a = list(a)
    b = list(b)
    if not a:
        return len(b)
    if not b:
        return len(a)
    if not (isinstance(a[0], int) and isinstance(b[0], int)):
        ids: dict = {}
        a = [ids.setdefault(t, len(ids)) for t in a]
        b = [ids.setdefault(t, len(ids)) for t in b]
    return levenshtein_ids(a, b)
