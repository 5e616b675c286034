# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled unit-cost Levenshtein kernel over integer id sequences."""

from cpython cimport array
import array


def levenshtein_ids(a, b):
    """Levenshtein distance between two sequences of ints."""
    cdef array.array arr_a = array.array('l', a)
    cdef array.array arr_b = array.array('l', b)
    cdef long[:] va = arr_a
    cdef long[:] vb = arr_b
    cdef Py_ssize_t n = va.shape[0]
    cdef Py_ssize_t m = vb.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    cdef array.array row_arr = array.array('l', range(n + 1))
    cdef long[:] row = row_arr
    cdef Py_ssize_t i, j
    cdef long above, diag, cur, ins, dele
    for i in range(1, m + 1):
        diag = row[0]
        row[0] = i
        for j in range(1, n + 1):
            above = row[j]
            cur = diag if va[j - 1] == vb[i - 1] else diag + 1
            ins = row[j - 1] + 1
            if ins < cur:
                cur = ins
            dele = above + 1
            if dele < cur:
                cur = dele
            row[j] = cur
            diag = above
    return row[n]
