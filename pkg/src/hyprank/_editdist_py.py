"""Pure-Python fallback for the Levenshtein kernel."""


def levenshtein_ids(a, b):
    """Levenshtein distance between two sequences of ints."""
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    row = list(range(n + 1))
    for i in range(1, m + 1):
        diag = row[0]
        row[0] = i
        bi = b[i - 1]
        for j in range(1, n + 1):
            above = row[j]
            cur = diag if a[j - 1] == bi else diag + 1
            ins = row[j - 1] + 1
            if ins < cur:
                cur = ins
            dele = above + 1
            if dele < cur:
                cur = dele
            row[j] = cur
            diag = above
    return row[n]
