"""Age-optimal status updates for an energy harvesting sensor over an erasure channel."""

from .analytic import (
    BracketError,
    ChannelModel,
    Regime,
    SolverResult,
    expected_epoch_area,
    expected_epoch_length,
    expected_inter_attempt,
    expected_inter_attempt_sq,
    greedy_aoi,
    infinite_battery_benchmark,
    lambda_from_lambda_prime,
    p_greedy,
    p_threshold,
    solve_optimal,
)
from .policy import BestEffortUniform, Greedy, PolicySpec, Threshold, waiting_time
from .simulator import EpochRecord, SimConfig, SimResult, run_replications, run_simulation
from .stats import EstimateWithError, iid_diagnostics, ratio_estimator

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ChannelModel",
    "Regime",
    "SolverResult",
    "expected_epoch_area",
    "expected_epoch_length",
    "expected_inter_attempt",
    "expected_inter_attempt_sq",
    "greedy_aoi",
    "infinite_battery_benchmark",
    "lambda_from_lambda_prime",
    "p_greedy",
    "p_threshold",
    "solve_optimal",
    "BestEffortUniform",
    "Greedy",
    "PolicySpec",
    "Threshold",
    "waiting_time",
    "EpochRecord",
    "SimConfig",
    "SimResult",
    "run_replications",
    "run_simulation",
    "EstimateWithError",
    "iid_diagnostics",
    "ratio_estimator",
]
