"""Local linear regression experts over lagged price relatives.

An expert ``E(k, w)`` predicts the next price relative of one asset. It turns
the asset's history into lagged windows of width ``w``, takes the ``k`` windows
closest to the most recent one, weights them with an exponential kernel and
fits a ridge-regularised weighted linear model, which is then evaluated at the
most recent window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

KERNEL_EPS = 1e-12
DEFAULT_RIDGE = 0.01


class InsufficientHistory(ValueError):
    """The series is too short for the requested window."""


class SingularFit(np.linalg.LinAlgError):
    """Normal equations are singular (only reachable with ``ridge == 0``)."""


@dataclass(frozen=True)
class ExpertSpec:
    k: int
    w: int
    ridge: float = DEFAULT_RIDGE
    degree: int = 1

    def __post_init__(self):
        if self.k < 1 or self.w < 1:
            raise ValueError(f"k and w must be positive, got k={self.k}, w={self.w}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be non-negative, got {self.ridge}")
        if self.degree != 1:
            raise ValueError("only degree-1 (local linear) fits are supported")


@dataclass(frozen=True)
class WindowedSet:
    """Lagged training rows.

    ``predictors[r]`` holds ``(x[t-1], ..., x[t-w])`` for label ``labels[r] = x[t]``
    with ``t = first_label_index + r``.
    """

    labels: np.ndarray
    predictors: np.ndarray
    first_label_index: int

    def __len__(self) -> int:
        return len(self.labels)

    def rows(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.labels.tolist(), self.predictors))


@dataclass(frozen=True)
class ExpertEstimate:
    value: float
    asset: Optional[str]
    period: int
    spec: ExpertSpec


def lag_matrix(series: np.ndarray, w: int) -> np.ndarray:
    """Return the ``(len - w) x w`` matrix of lagged predictors, most recent lag first."""
    n = len(series)
    return np.column_stack([series[w - lag : n - lag] for lag in range(1, w + 1)])


def windowize(series, w: int) -> WindowedSet:
    x = np.asarray(series, dtype=float)
    if w < 1:
        raise ValueError(f"window size must be positive, got {w}")
    if len(x) <= w:
        raise InsufficientHistory(f"series of length {len(x)} has no row for window {w}")
    return WindowedSet(x[w:].copy(), lag_matrix(x, w), w)


def _distances(query: np.ndarray, predictors: np.ndarray) -> np.ndarray:
    diff = predictors - query
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _neighbour_order(dist: np.ndarray) -> np.ndarray:
    # stable sort: equal distances keep the older row first
    return np.argsort(dist, kind="stable")


def knn_select(query, train: WindowedSet, k: int) -> list[tuple[int, float]]:
    """Indices and Euclidean distances of the ``min(k, len(train))`` nearest rows."""
    if len(train) == 0:
        raise ValueError("empty training set")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    dist = _distances(np.asarray(query, dtype=float), train.predictors)
    order = _neighbour_order(dist)[:k]
    return [(int(r), float(dist[r])) for r in order]


def kernel_weights(distances) -> np.ndarray:
    """Exponential kernel with bandwidth set by the farthest selected neighbour."""
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        return d
    h = max(float(d.max()), KERNEL_EPS)
    return np.exp(-d / h)


def fit_local_linear(predictors, labels, weights, ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """Weighted ridge least squares with an unpenalised intercept.

    Returns ``beta`` of length ``w + 1``, intercept first.
    """
    X = np.asarray(predictors, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(labels, dtype=float)
    wt = np.asarray(weights, dtype=float)
    if not (len(X) == len(y) == len(wt)) or len(y) == 0:
        raise ValueError("predictors, labels and weights must be non-empty and equally long")
    p = X.shape[1] + 1
    D = np.empty((len(y), p))
    D[:, 0] = 1.0
    D[:, 1:] = X
    Dw = D * wt[:, None]
    A = D.T @ Dw
    b = Dw.T @ y
    if ridge > 0:
        idx = np.arange(1, p)
        A[idx, idx] += ridge
    elif np.linalg.matrix_rank(A) < p:
        raise SingularFit("weighted normal equations are singular; use ridge > 0")
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularFit(str(exc)) from exc


def _predict_sorted(X, y, dist, order, query, ks: Iterable[int], ridge: float) -> list[float]:
    """Fit and evaluate one expert per ``k`` sharing a single neighbour ordering."""
    out = []
    for k in ks:
        top = order[:k]
        wt = kernel_weights(dist[top])
        beta = fit_local_linear(X[top], y[top], wt, ridge)
        out.append(float(beta[0] + query @ beta[1:]))
    return out


def _check_period(n: int, i: int, w: int):
    if i < w + 1:
        raise InsufficientHistory(f"period {i} needs at least {w + 1} prior observations")
    if i > n:
        raise IndexError(f"period {i} is beyond the series of length {n}")


def expert_predict(series, i: int, spec: ExpertSpec, asset: Optional[str] = None) -> ExpertEstimate:
    """Estimate ``series[i]`` using only ``series[:i]``.

    ``i`` may equal ``len(series)`` to forecast the period after the data ends.
    """
    x = np.asarray(series, dtype=float)
    _check_period(len(x), i, spec.w)
    train = windowize(x[:i], spec.w)
    # contiguous copy: a reversed view can take a different dot-product path and round differently
    query = np.ascontiguousarray(x[i - spec.w : i][::-1])
    dist = _distances(query, train.predictors)
    order = _neighbour_order(dist)
    (value,) = _predict_sorted(train.predictors, train.labels, dist, order, query, [spec.k], spec.ridge)
    return ExpertEstimate(value, asset, i, spec)


def expert_panel(series, ks: Sequence[int], ws: Sequence[int], ridge: float = DEFAULT_RIDGE,
                 start: Optional[int] = None) -> np.ndarray:
    """Estimates of every ``(k, w)`` expert for every period of ``series``.

    Returns an array of shape ``(len(series), len(ws) * len(ks))``; column
    ``a * len(ks) + b`` belongs to ``(ks[b], ws[a])``. Periods without enough
    history are NaN. Values are identical to calling :func:`expert_predict`
    per expert and period; the neighbour ordering is shared across ``ks``.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    ks = list(ks)
    out = np.full((n, len(ws) * len(ks)), np.nan)
    for a, w in enumerate(ws):
        if n <= w:
            continue
        X_all = lag_matrix(x, w)
        y_all = x[w:]
        first = w + 1 if start is None else max(start, w + 1)
        for i in range(first, n):
            rows = i - w
            X, y = X_all[:rows], y_all[:rows]
            query = X_all[rows]
            dist = _distances(query, X)
            order = _neighbour_order(dist)
            out[i, a * len(ks) : (a + 1) * len(ks)] = _predict_sorted(X, y, dist, order, query, ks, ridge)
    return out
