"""Exit criteria for the package; each test records one PASS/FAIL summary line."""

import csv
import datetime as dt
import time

import numpy as np

from lolrec.committee import CommitteeSpec
from lolrec.harness import cli_main, run_equal_weight_benchmark, sweep_m
from lolrec.market_data import MarketMatrix
from lolrec.metrics import aay
from lolrec.portfolio import build_panel, portfolio_return, run_backtest
from lolrec.regression import ExpertSpec, expert_predict

from . import oracle
from .conftest import ACCEPTANCE_RESULTS, random_market


def record(num, name, ok, detail):
    ACCEPTANCE_RESULTS.append((num, name, bool(ok), detail))
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def recursion_error(ledger, market):
    direct = 1.0
    for i in range(market.n):
        direct *= portfolio_return(ledger.portfolio(i), market.relatives[i])
    return abs(ledger.final_wealth - direct) / abs(direct)


def test_1_metric_formulas():
    checks = [
        (aay(5.09e9, 22)[0], 2.762, 0.001),
        (aay(5.3583, 5)[1], 0.399, 0.01),
        (aay(1.38e9, 22)[0], 2.603, 0.001),
    ]
    got = [round(v * 100, 2) for v, _, _ in checks]
    ok = all(abs(v - ref) <= tol for v, ref, tol in checks)
    record(1, "AAY reproduction", ok, f"gross 5.09e9/22y={got[0]}%, net 5.3583/5y={got[1]}%, gross 1.38e9/22y={got[2]}%")


def test_2_oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(3, 61))
        w = int(rng.integers(1, min(8, n - 2) + 1))
        k = int(rng.integers(1, 20))
        i = int(rng.integers(w + 1, n + 1))
        x = np.exp(rng.normal(0, rng.choice([0.005, 0.02, 0.1]), n))
        got = expert_predict(x, i, ExpertSpec(k, w)).value
        ref = oracle.predict(x, i, k, w)
        worst = max(worst, abs(got - ref) / abs(ref))
    record(2, "expert vs brute-force oracle", worst <= 1e-9, f"500 instances, max relative error {worst:.2e}")


def test_3_4_simplex_causality_recursion():
    rng = np.random.default_rng(33)
    t0 = time.perf_counter()
    max_dev = 0.0
    max_rec = 0.0
    causal = True
    for _ in range(50):
        d = int(rng.integers(1, 11))
        n = int(rng.integers(40, 301))
        spec = CommitteeSpec(
            rng.choice(np.arange(1, 6), size=int(rng.integers(1, 3)), replace=False),
            rng.choice(np.arange(1, 4), size=int(rng.integers(1, 3)), replace=False),
            rng.choice(["average", "median", "mode"]),
        )
        m = int(rng.integers(1, d + 2))
        market = random_market(rng, n, d)
        ledger = run_backtest(market, spec, m)
        totals = ledger.weights.sum(axis=1) + ledger.cash
        max_dev = max(max_dev, float(np.abs(totals - 1.0).max()))
        if (ledger.weights < 0).any():
            max_dev = np.inf
        max_rec = max(max_rec, recursion_error(ledger, market))

        cut = int(rng.integers(1, n))
        rel = market.relatives.copy()
        rel[cut:] = np.exp(rng.normal(0, 0.2, rel[cut:].shape))
        other = run_backtest(MarketMatrix.from_array(rel), spec, m)
        causal &= np.array_equal(other.weights[: cut + 1], ledger.weights[: cut + 1])
        causal &= np.array_equal(other.cash[: cut + 1], ledger.cash[: cut + 1])
        max_rec = max(max_rec, recursion_error(other, MarketMatrix.from_array(rel)))
    elapsed = time.perf_counter() - t0
    record(3, "simplex and causality", max_dev <= 1e-12 and causal and elapsed < 60,
           f"50 backtests, max |sum-1|={max_dev:.1e}, future mutation bit-identical={causal}, {elapsed:.1f}s")
    record(4, "wealth recursion", max_rec <= 1e-12, f"max relative error {max_rec:.1e} over 100 backtests")


def test_5_cash_fallback():
    # asset 0 rises for a while then falls steadily; asset 1 falls throughout
    n = 40
    rel = np.column_stack([
        np.where(np.arange(n) < 15, 1.02, 0.97),
        np.full(n, 0.98),
    ])
    market = MarketMatrix.from_array(rel)
    spec = CommitteeSpec([1, 2], [1, 2], "average")
    panel = build_panel(market, spec)
    ledger = run_backtest(market, spec, 2)
    all_down = [i for i in range(panel.start, n) if np.all(panel.voted[i] < 1.0)]
    returns = [ledger.returns[i] for i in all_down]
    ok = len(all_down) > 0 and all(r == 1.0 for r in returns) and all(ledger.cash[i] == 1.0 for i in all_down)
    record(5, "cash fallback", ok, f"{len(all_down)} periods with every estimate < 1.0, all returned exactly 1.0")


def test_6_saturation():
    rng = np.random.default_rng(6)
    identical = True
    for _ in range(10):
        d = int(rng.integers(1, 9))
        market = random_market(rng, int(rng.integers(30, 120)), d)
        spec = CommitteeSpec([1, 2, 3], [1, 2], rng.choice(["average", "median", "mode"]))
        a, b = sweep_m(market, spec, [d, 2 * d])
        identical &= (a.final_wealth, a.std_period_returns) == (b.final_wealth, b.std_period_returns)
    record(6, "m saturation", identical, "sweep rows for m=d and m=2d identical on 10 random markets")


def predictable_market(seed, n=500):
    rng = np.random.default_rng(seed)
    rel = rng.normal(1.0, 0.01, (n, 5))
    rel[:, 0] = np.where(np.arange(n) % 2 == 0, 1.02, 0.99)
    return MarketMatrix.from_array(rel)


def test_7_predictability_advantage():
    spec = CommitteeSpec([1, 2, 3], [1, 2, 3], "average")
    t0 = time.perf_counter()
    wins = 0
    ratios = []
    for seed in range(20):
        market = predictable_market(seed)
        lol = run_backtest(market, spec, 1).final_wealth
        eq = run_equal_weight_benchmark(market).final_wealth
        wins += lol > eq
        ratios.append(lol / eq)
    elapsed = time.perf_counter() - t0
    record(7, "predictability advantage", wins >= 18 and elapsed < 60,
           f"LOLREC beat equal weight in {wins}/20 seeds (median wealth ratio {np.median(ratios):.1f}), {elapsed:.1f}s")


def test_8_desk_scale(tmp_path):
    rng = np.random.default_rng(8)
    n, d = 2000, 10
    prices = 50 * np.exp(np.cumsum(rng.normal(0.0002, 0.015, (n + 1, d)), axis=0))
    data = tmp_path / "prices.csv"
    start = dt.date(2000, 1, 3)
    with data.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date"] + [f"T{j}" for j in range(d)])
        for i, row in enumerate(prices):
            w.writerow([(start + dt.timedelta(days=i)).isoformat()] + [repr(float(v)) for v in row])
    args = ["--data", str(data), "--k", "1..5", "--w", "1..5", "--voting", "mode", "--m", "3"]
    t0 = time.perf_counter()
    assert cli_main(args + ["--threads", "1", "--output", str(tmp_path / "t1")]) == 0
    single = time.perf_counter() - t0
    assert cli_main(args + ["--threads", "4", "--output", str(tmp_path / "t4")]) == 0
    same = all(
        (tmp_path / "t1" / f).read_bytes() == (tmp_path / "t4" / f).read_bytes()
        for f in ("wealth.csv", "weights.csv", "committees.csv", "report.txt")
    )
    record(8, "desk-scale performance", single < 300 and same,
           f"d=10, n=2000, 25 experts: {single:.1f}s single-threaded; outputs identical with --threads 4: {same}")
