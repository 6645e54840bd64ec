"""Brute-force reference for a single expert prediction.

Deliberately shares no code with ``lolrec.regression``: plain Python lists,
an exhaustive sort, ``math.exp`` weights, a hand-built normal-equations
matrix and an explicit matrix inverse.
"""

import math

import numpy as np


def windows(series, w):
    return [(series[t], [series[t - lag] for lag in range(1, w + 1)]) for t in range(w, len(series))]


def normal_equations(rows, weights, ridge):
    p = len(rows[0][1]) + 1
    A = [[0.0] * p for _ in range(p)]
    b = [0.0] * p
    for (y, x), wt in zip(rows, weights):
        z = [1.0] + list(x)
        for r in range(p):
            b[r] += wt * z[r] * y
            for c in range(p):
                A[r][c] += wt * z[r] * z[c]
    for r in range(1, p):
        A[r][r] += ridge
    return A, b


def solve_by_inverse(rows, weights, ridge):
    A, b = normal_equations(rows, weights, ridge)
    return np.linalg.inv(np.array(A)) @ np.array(b)


def predict(series, i, k, w, ridge=0.01):
    series = [float(v) for v in series]
    rows = windows(series[:i], w)
    query = [series[i - lag] for lag in range(1, w + 1)]
    scored = sorted(
        (math.sqrt(sum((a - q) ** 2 for a, q in zip(x, query))), idx)
        for idx, (_, x) in enumerate(rows)
    )[:k]
    h = max(scored[-1][0], 1e-12)
    chosen = [rows[idx] for _, idx in scored]
    weights = [math.exp(-dist / h) for dist, _ in scored]
    beta = solve_by_inverse(chosen, weights, ridge)
    return beta[0] + sum(bj * qj for bj, qj in zip(beta[1:], query))
