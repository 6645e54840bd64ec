"""Performance measures for wealth series and committees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import MarketMatrix
from .portfolio import BacktestLedger

TRADING_DAYS_PER_YEAR = 252.0


@dataclass(frozen=True)
class PerformanceReport:
    final_wealth: float
    aay_gross: float  # final_wealth ** (1 / years)
    aay_net: float  # aay_gross - 1
    min_capital: float
    worst_period_return: float  # min(S_i / S_{i-1}) - 1
    std_period_returns: float  # population std of S_i / S_{i-1}
    mean_period_return: float
    years: float


def aay(final_wealth: float, years: float) -> tuple[float, float]:
    """Average annual yield as ``(gross, net)``."""
    if not final_wealth > 0 or not years > 0:
        raise ValueError(f"final wealth and years must be positive, got {final_wealth}, {years}")
    gross = float(final_wealth) ** (1.0 / years)
    return gross, gross - 1.0


def period_returns(wealth) -> np.ndarray:
    s = np.asarray(wealth, dtype=float)
    return s[1:] / s[:-1]


def period_return_stats(wealth) -> tuple[float, float, float, float]:
    """``(worst, std, mean, min_capital)`` of a wealth series starting at S_0."""
    s = np.asarray(wealth, dtype=float)
    if len(s) < 2:
        raise ValueError("need at least two wealth values")
    r = period_returns(s)
    return float(r.min() - 1.0), float(r.std()), float(r.mean()), float(s.min())


def performance_report(wealth, years_divisor: float = TRADING_DAYS_PER_YEAR) -> PerformanceReport:
    s = np.asarray(wealth, dtype=float)
    years = (len(s) - 1) / years_divisor
    worst, std, mean, min_cap = period_return_stats(s)
    final = float(s[-1] / s[0])
    if final > 0:
        gross, net = aay(final, years)
    else:
        gross, net = 0.0, -1.0
    return PerformanceReport(float(s[-1]), gross, net, min_cap, worst, std, mean, years)


@dataclass(frozen=True)
class CommitteeRow:
    ticker: str
    committee_wealth: float
    buy_and_hold_wealth: float
    relative: float
    average_weight: float
    times_selected: int


def committee_report(ledger: BacktestLedger, market: MarketMatrix) -> list[CommitteeRow]:
    if ledger.committee_wealth is None:
        raise ValueError("ledger carries no committee wealth (benchmark run?)")
    s_c = ledger.committee_wealth[-1]
    # sequential product, matching how committee wealth compounds
    s_bnh = np.cumprod(market.relatives, axis=0)[-1]
    rows = []
    for j, t in enumerate(market.tickers):
        rel = s_c[j] / s_bnh[j] if s_bnh[j] > 0 else float("inf")
        rows.append(CommitteeRow(
            t, float(s_c[j]), float(s_bnh[j]), float(rel),
            float(ledger.average_weights[j]), int(ledger.selection_counts[j]),
        ))
    return rows
