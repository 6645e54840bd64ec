"""Benchmarks, the m sweep, report writing and the command line front end."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .committee import CommitteeSpec, Voting
from .market_data import DataError, MarketMatrix, load_market
from .metrics import TRADING_DAYS_PER_YEAR, PerformanceReport, committee_report, performance_report
from .portfolio import BacktestLedger, EstimatePanel, allocate, build_panel

log = logging.getLogger("lolrec")

BENCHMARKS = ("equal", "bnh")


def _ledger_from_weights(market: MarketMatrix, weights: np.ndarray, wealth: Optional[np.ndarray] = None) -> BacktestLedger:
    returns = np.einsum("ij,ij->i", weights, market.relatives)
    if wealth is None:
        wealth = np.concatenate([[1.0], np.cumprod(returns)])
    d = market.d
    return BacktestLedger(
        wealth, returns, weights, np.zeros(market.n),
        np.zeros(d, dtype=int), np.zeros(d),
    )


def run_equal_weight_benchmark(market: MarketMatrix) -> BacktestLedger:
    """Rebalance to ``1/d`` in every asset each period."""
    if market.n == 0 or market.d == 0:
        raise ValueError("empty market")
    weights = np.full((market.n, market.d), 1.0 / market.d)
    return _ledger_from_weights(market, weights)


def run_buy_and_hold_benchmark(market: MarketMatrix, weights0=None) -> BacktestLedger:
    """Hold the initial allocation without ever rebalancing."""
    if market.n == 0 or market.d == 0:
        raise ValueError("empty market")
    d = market.d
    w0 = np.full(d, 1.0 / d) if weights0 is None else np.asarray(weights0, dtype=float)
    if w0.shape != (d,) or np.any(w0 < 0) or abs(w0.sum() - 1.0) > 1e-12:
        raise ValueError("initial weights must be a non-negative vector of length d summing to 1")
    holdings = np.vstack([w0, w0 * np.cumprod(market.relatives, axis=0)])
    wealth = holdings.sum(axis=1)
    prev = holdings[:-1]
    total = wealth[:-1, None]
    # a wiped-out portfolio keeps its last allocation; its return is 0 either way
    weights = np.divide(prev, total, out=np.tile(w0, (market.n, 1)), where=total > 0)
    ledger = _ledger_from_weights(market, weights, wealth)
    ledger.returns = np.divide(wealth[1:], wealth[:-1], out=np.zeros(market.n), where=wealth[:-1] > 0)
    return ledger


@dataclass(frozen=True)
class SweepRow:
    m: int
    final_wealth: float
    std_period_returns: float


def sweep_m(market: MarketMatrix, spec: CommitteeSpec, m_values: Sequence[int],
            panel: Optional[EstimatePanel] = None, threads: int = 1) -> list[SweepRow]:
    """One backtest per ``m``; expert estimates and committee wealth are computed once."""
    m_values = sorted(set(int(m) for m in m_values))
    if not m_values:
        raise ValueError("no m values to sweep")
    if panel is None:
        panel = build_panel(market, spec, threads)
    rows = []
    for m in m_values:
        ledger = allocate(market, panel, m)
        rows.append(SweepRow(m, ledger.final_wealth, float(ledger.returns.std())))
    return rows


def parse_int_set(text: str) -> list[int]:
    """Parse ``"1..5"``, ``"1,3,7"`` or mixtures like ``"1..3,10"``."""
    out: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.update(range(lo, hi + 1))
        else:
            out.add(int(part))
    if not out:
        raise ValueError(f"no integers in {text!r}")
    if min(out) < 1:
        raise ValueError(f"values must be positive in {text!r}")
    return sorted(out)


@dataclass
class RunConfig:
    data_path: Path
    data_kind: str = "prices"
    K: tuple[int, ...] = (1, 2, 3)
    W: tuple[int, ...] = (1, 2, 3)
    voting: Voting = Voting.AVERAGE
    m: int = 10
    sweep: Optional[list[int]] = None
    years_divisor: float = TRADING_DAYS_PER_YEAR
    output_dir: Path = Path("lolrec_out")
    initial_capital: float = 1.0
    threads: int = 1
    benchmarks: tuple[str, ...] = BENCHMARKS
    dump_estimates: bool = False

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.sweep is not None and (not self.sweep or min(self.sweep) < 1):
            raise ValueError("sweep range must be non-empty with every m >= 1")
        if self.years_divisor <= 0 or self.initial_capital <= 0:
            raise ValueError("years divisor and initial capital must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        for b in self.benchmarks:
            if b not in BENCHMARKS:
                raise ValueError(f"unknown benchmark {b!r}; choose from {', '.join(BENCHMARKS)}")


@dataclass
class RunResult:
    market: MarketMatrix
    panel: EstimatePanel
    ledger: BacktestLedger
    benchmarks: dict[str, BacktestLedger] = field(default_factory=dict)
    sweep: Optional[list[SweepRow]] = None


def execute(config: RunConfig, market: Optional[MarketMatrix] = None) -> RunResult:
    if market is None:
        market = load_market(config.data_path, config.data_kind)
    spec = CommitteeSpec(config.K, config.W, config.voting)
    log.info("market: %d periods x %d assets; committee of %d experts", market.n, market.d, spec.size)
    t0 = time.perf_counter()
    panel = build_panel(market, spec, config.threads)
    log.info("expert estimates computed in %.1fs", time.perf_counter() - t0)
    ledger = allocate(market, panel, config.m)
    result = RunResult(market, panel, ledger)
    if "equal" in config.benchmarks:
        result.benchmarks["equal"] = run_equal_weight_benchmark(market)
    if "bnh" in config.benchmarks:
        result.benchmarks["bnh"] = run_buy_and_hold_benchmark(market)
    if config.sweep:
        result.sweep = sweep_m(market, spec, config.sweep, panel)
    return result


# ---------------------------------------------------------------- output


def _date_str(d) -> str:
    return "" if d is None else d.isoformat()


def _period_dates(market: MarketMatrix) -> list[str]:
    return [_date_str(market.start_date)] + [_date_str(d) for d in market.dates]


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


_REPORT_FIELDS = [
    ("final_wealth", "Final wealth"),
    ("min_capital", "Minimum of capital"),
    ("worst_period_return", "Worst 1-period return"),
    ("aay_gross", "AAY gross (S^(1/N))"),
    ("aay_net", "AAY net (S^(1/N) - 1)"),
    ("std_period_returns", "Std of 1-period returns"),
    ("mean_period_return", "Average 1-period return"),
    ("years", "Years (N)"),
]

_STRATEGY_NAMES = {"lolrec": "LOLREC", "equal": "Equally weighted", "bnh": "Buy-and-hold"}


def format_report(reports: dict[str, PerformanceReport]) -> str:
    """Aligned plain-text table, one column per strategy."""
    names = [_STRATEGY_NAMES[k] for k in reports]
    label_w = max(len(lbl) for _, lbl in _REPORT_FIELDS)
    cells = []
    for attr, label in _REPORT_FIELDS:
        row = []
        for rep in reports.values():
            v = getattr(rep, attr)
            if attr in ("worst_period_return", "aay_net", "aay_gross"):
                row.append(f"{v * 100:.1f}%")
            elif attr == "years":
                row.append(f"{v:.2f}")
            else:
                row.append(f"{v:.6g}")
        cells.append((label, row))
    col_w = [max(len(names[c]), *(len(r[c]) for _, r in cells)) for c in range(len(names))]
    lines = [" " * label_w + "  " + "  ".join(n.rjust(w) for n, w in zip(names, col_w))]
    for label, row in cells:
        lines.append(label.ljust(label_w) + "  " + "  ".join(v.rjust(w) for v, w in zip(row, col_w)))
    return "\n".join(lines) + "\n"


def wealth_series(result: RunResult, config: RunConfig) -> dict[str, np.ndarray]:
    series = {"lolrec": result.ledger.wealth * config.initial_capital}
    for name, bl in result.benchmarks.items():
        series[name] = bl.wealth * config.initial_capital
    return series


def strategy_reports(result: RunResult, config: RunConfig) -> dict[str, PerformanceReport]:
    return {name: performance_report(s, config.years_divisor)
            for name, s in wealth_series(result, config).items()}


def write_outputs(result: RunResult, config: RunConfig) -> list[Path]:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    market, ledger = result.market, result.ledger
    dates = _period_dates(market)
    written = []

    series = wealth_series(result, config)
    cols = list(series)
    header = ["period", "date"] + ["S_" + c for c in cols]
    rows = ([i, dates[i]] + [float(series[c][i]) for c in cols] for i in range(market.n + 1))
    _write_csv(out / "wealth.csv", header, rows)
    written.append(out / "wealth.csv")

    rows = (
        [i + 1, dates[i + 1], float(ledger.cash[i])] + [float(v) for v in ledger.weights[i]]
        for i in range(market.n)
    )
    _write_csv(out / "weights.csv", ["period", "date", "cash"] + market.tickers, rows)
    written.append(out / "weights.csv")

    crows = committee_report(ledger, market)
    _write_csv(
        out / "committees.csv",
        ["ticker", "S_C", "S_BNH", "relative", "average_weight", "times_selected"],
        ([r.ticker, r.committee_wealth, r.buy_and_hold_wealth, r.relative, r.average_weight, r.times_selected]
         for r in crows),
    )
    written.append(out / "committees.csv")

    reports = strategy_reports(result, config)
    fields = [a for a, _ in _REPORT_FIELDS]
    _write_csv(out / "report.csv", ["strategy"] + fields,
               ([name] + [getattr(r, a) for a in fields] for name, r in reports.items()))
    (out / "report.txt").write_text(format_report(reports))
    written += [out / "report.csv", out / "report.txt"]

    if result.sweep is not None:
        _write_csv(out / "sweep.csv", ["m", "final_wealth", "std"],
                   ([r.m, r.final_wealth * config.initial_capital, r.std_period_returns] for r in result.sweep))
        written.append(out / "sweep.csv")

    if config.dump_estimates:
        experts = result.panel.spec.experts()
        header = ["period", "date", "ticker"] + [f"k{e.k}_w{e.w}" for e in experts] + ["voted"]
        rows = (
            [i + 1, dates[i + 1], t] + [float(v) for v in result.panel.experts[i, j]] + [float(result.panel.voted[i, j])]
            for i in range(result.panel.start, market.n)
            for j, t in enumerate(market.tickers)
        )
        _write_csv(out / "estimates.csv", header, rows)
        written.append(out / "estimates.csv")
    return written


# ---------------------------------------------------------------- CLI


def _int_set(text):
    try:
        return parse_int_set(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lolrec",
        description="Backtest the local linear regression ensemble committee strategy.",
    )
    p.add_argument("--data", required=True, type=Path, help="CSV with a date column and one column per ticker")
    p.add_argument("--data-kind", choices=["prices", "relatives"], default="prices")
    p.add_argument("--k", type=_int_set, default=[1, 2, 3], help="neighbour counts, e.g. 1..10 or 1,2,5")
    p.add_argument("--w", type=_int_set, default=[1, 2, 3], help="window sizes, e.g. 1..5")
    p.add_argument("--voting", choices=[v.value for v in Voting], default="average")
    p.add_argument("--m", type=_int_set, default=[10],
                   help="number of assets to select; a range also runs a sweep and uses its first value")
    p.add_argument("--sweep-m", type=_int_set, default=None, help="m values to sweep, e.g. 1..50")
    p.add_argument("--years-divisor", type=float, default=TRADING_DAYS_PER_YEAR,
                   help="periods per year used for AAY (default 252)")
    p.add_argument("--initial-capital", type=float, default=1.0)
    p.add_argument("--output", type=Path, default=Path("lolrec_out"))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--benchmarks", default="equal,bnh",
                   help="comma list from {equal,bnh}, or 'none'")
    p.add_argument("--dump-estimates", action="store_true", help="also write per-expert estimates.csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    benchmarks = () if args.benchmarks.strip() == "none" else tuple(
        b.strip() for b in args.benchmarks.split(",") if b.strip()
    )
    sweep = args.sweep_m
    if len(args.m) > 1:
        sweep = sorted(set(sweep or []) | set(args.m))
    return RunConfig(
        data_path=args.data,
        data_kind=args.data_kind,
        K=tuple(args.k),
        W=tuple(args.w),
        voting=Voting(args.voting),
        m=args.m[0],
        sweep=sweep,
        years_divisor=args.years_divisor,
        output_dir=args.output,
        initial_capital=args.initial_capital,
        threads=args.threads,
        benchmarks=benchmarks,
        dump_estimates=args.dump_estimates,
    )


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        result = execute(config)
    except (DataError, ValueError) as exc:
        print(f"lolrec: error: {exc}", file=sys.stderr)
        return 1
    written = write_outputs(result, config)
    for p in written:
        log.info("wrote %s", p)
    sys.stdout.write(format_report(strategy_reports(result, config)))
    return 0
