"""Local linear regression ensemble committees for sequential portfolio selection."""

from .committee import CommitteeSpec, CommitteeState, Voting, update_committee_wealth, vote
from .harness import (
    RunConfig,
    cli_main,
    run_buy_and_hold_benchmark,
    run_equal_weight_benchmark,
    sweep_m,
)
from .market_data import DataError, MarketMatrix, PriceTable, load_price_table, load_relatives, to_market_matrix
from .metrics import PerformanceReport, aay, committee_report, performance_report, period_return_stats
from .portfolio import (
    BacktestLedger,
    PortfolioVector,
    compute_weights,
    portfolio_return,
    run_backtest,
    select_top_m,
    truncate_estimates,
)
from .regression import (
    ExpertSpec,
    expert_predict,
    fit_local_linear,
    kernel_weights,
    knn_select,
    windowize,
)

__version__ = "0.1.0"
