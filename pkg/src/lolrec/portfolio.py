"""Portfolio construction from committee estimates and the backtest loop."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .committee import CommitteeSpec, committee_wealth_path, vote_rows
from .market_data import MarketMatrix
from .regression import expert_panel

log = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class PortfolioVector:
    weights: np.ndarray
    cash: float = 0.0

    def __post_init__(self):
        w = self.weights
        if np.any(w < 0) or self.cash < 0:
            raise ValueError("portfolio components must be non-negative")
        if abs(w.sum() + self.cash - 1.0) > 1e-9:
            raise ValueError(f"portfolio does not sum to 1 (sum={w.sum() + self.cash!r})")

    @classmethod
    def uniform(cls, d: int) -> "PortfolioVector":
        return cls(np.full(d, 1.0 / d), 0.0)

    @classmethod
    def all_cash(cls, d: int) -> "PortfolioVector":
        return cls(np.zeros(d), 1.0)


@dataclass
class EstimatePanel:
    """Everything about a LOLREC run that does not depend on ``m``.

    ``experts[i, j, c]`` is the estimate of expert ``c`` (order of
    :meth:`CommitteeSpec.experts`) for asset ``j`` in period ``i``;
    ``voted[i, j]`` the committee output; ``committee_wealth[i, j]`` the
    committee wealth before period ``i`` (row ``n`` is the final wealth).
    Rows before ``start`` are warm-up and hold NaN estimates.
    """

    spec: CommitteeSpec
    experts: np.ndarray
    voted: np.ndarray
    committee_wealth: np.ndarray
    start: int


@dataclass
class BacktestLedger:
    wealth: np.ndarray  # n + 1 values, wealth[0] == 1
    returns: np.ndarray  # n portfolio returns
    weights: np.ndarray  # n x d
    cash: np.ndarray  # n
    selection_counts: np.ndarray  # d
    average_weights: np.ndarray  # d, mean weight over the periods an asset was selected
    committee_wealth: Optional[np.ndarray] = None  # (n + 1) x d
    start: int = 0

    @property
    def final_wealth(self) -> float:
        return float(self.wealth[-1])

    def portfolio(self, i: int) -> PortfolioVector:
        return PortfolioVector(self.weights[i], float(self.cash[i]))


def truncate_estimates(voted: Sequence[Optional[float]]) -> np.ndarray:
    """Zero out estimates below 1.0 and absent (None/NaN) entries."""
    v = np.array([np.nan if e is None else e for e in voted], dtype=float)
    keep = ~np.isnan(v) & (v >= 1.0)
    return np.where(keep, v, 0.0)


def select_top_m(truncated, m: int) -> np.ndarray:
    """Indices of the up-to-``m`` largest positive entries; ties go to the lower index."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    t = np.asarray(truncated, dtype=float)
    pos = np.flatnonzero(t > 0)
    order = pos[np.argsort(-t[pos], kind="stable")]
    return np.sort(order[:m])


def compute_weights(truncated, selected, committee_wealth) -> PortfolioVector:
    t = np.asarray(truncated, dtype=float)
    cw = np.asarray(committee_wealth, dtype=float)
    if np.any(cw < 0):
        raise ValueError("committee wealth must be non-negative")
    raw = np.zeros_like(t)
    sel = np.asarray(selected, dtype=int)
    raw[sel] = t[sel] * cw[sel]
    total = raw.sum()
    if total > 0:
        return PortfolioVector(raw / total, 0.0)
    return PortfolioVector.all_cash(len(t))


def portfolio_return(B: PortfolioVector, X) -> float:
    x = np.asarray(X, dtype=float)
    if x.shape != B.weights.shape:
        raise ValueError(f"market vector has shape {x.shape}, portfolio {B.weights.shape}")
    return float(B.cash + B.weights @ x)


def _asset_estimates(series: np.ndarray, spec: CommitteeSpec, start: int):
    experts = expert_panel(series, spec.K, spec.W, spec.ridge, start=start)
    experts[:start] = np.nan
    return experts, vote_rows(experts, spec.voting)


def build_panel(market: MarketMatrix, spec: CommitteeSpec, threads: int = 1) -> EstimatePanel:
    """Run every expert and committee over the whole market.

    Assets are independent, so they can be spread over ``threads`` workers;
    the result does not depend on the thread count.
    """
    start = spec.max_window + 1
    if market.n < start + 1:
        raise ValueError(
            f"market has {market.n} periods; committee with max window {spec.max_window} "
            f"needs at least {start + 1}"
        )
    cols = [market.relatives[:, j] for j in range(market.d)]

    def job(col):
        return _asset_estimates(col, spec, start)

    if threads > 1 and market.d > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, cols))
    else:
        results = [job(c) for c in cols]

    experts = np.stack([r[0] for r in results], axis=1)
    voted = np.column_stack([r[1] for r in results])
    cw = np.column_stack([committee_wealth_path(voted[:, j], cols[j]) for j in range(market.d)])
    return EstimatePanel(spec, experts, voted, cw, start)


def allocate(market: MarketMatrix, panel: EstimatePanel, m: int) -> BacktestLedger:
    """Steps that depend on ``m``: truncation, top-m selection, weights, wealth."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    n, d = market.n, market.d
    X = market.relatives
    weights = np.zeros((n, d))
    cash = np.zeros(n)
    returns = np.zeros(n)
    counts = np.zeros(d, dtype=int)
    weight_sums = np.zeros(d)
    uniform = PortfolioVector.uniform(d)
    for i in range(n):
        if i < panel.start:
            B = uniform
        else:
            trunc = truncate_estimates(panel.voted[i])
            sel = select_top_m(trunc, m)
            B = compute_weights(trunc, sel, panel.committee_wealth[i])
            counts[sel] += 1
            weight_sums[sel] += B.weights[sel]
        weights[i] = B.weights
        cash[i] = B.cash
        returns[i] = portfolio_return(B, X[i])
    wealth = np.concatenate([[1.0], np.cumprod(returns)])
    avg = np.divide(weight_sums, counts, out=np.zeros(d), where=counts > 0)
    return BacktestLedger(wealth, returns, weights, cash, counts, avg, panel.committee_wealth, panel.start)


def run_backtest(market: MarketMatrix, spec: CommitteeSpec, m: int, threads: int = 1) -> BacktestLedger:
    panel = build_panel(market, spec, threads)
    return allocate(market, panel, m)
