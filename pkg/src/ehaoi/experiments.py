"""Experiment drivers: q-sweeps, CSV export and theory-vs-simulation checks."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, TextIO

import numpy as np

from .analytic import ChannelModel, Regime, greedy_aoi, infinite_battery_benchmark, solve_optimal
from .policy import Greedy, PolicySpec, Threshold
from .simulator import SimConfig, run_replications, run_simulation
from .stats import EstimateWithError, mean_estimate

__all__ = [
    "CSV_HEADER",
    "SweepRow",
    "ValidationReport",
    "ValidationRow",
    "format_report",
    "optimal_policy",
    "sweep_q",
    "validate_theory",
    "write_sweep_csv",
]

CSV_HEADER = "q,lambda_prime,lambda_star_b1,greedy_aoi,b_inf_bound,sim_aoi_mean,sim_aoi_stderr,regime"
DEFAULT_Q_MIN, DEFAULT_Q_MAX, DEFAULT_STEPS = 0.01, 0.95, 50
DEFAULT_SIM_EPOCHS, DEFAULT_SIM_REPS = 100_000, 8
Z_FLAG = 4.0


@dataclass(frozen=True)
class SweepRow:
    q: float
    lambda_prime: float
    lambda_star_b1: float
    greedy_aoi: float
    b_inf_bound: float
    sim_aoi_mean: float | None
    sim_aoi_stderr: float | None
    regime: Regime


def optimal_policy(channel: ChannelModel, tol: float = 1e-9) -> PolicySpec:
    sol = solve_optimal(channel, tol)
    return Greedy() if sol.regime is Regime.GREEDY else Threshold(sol.lambda_prime)


def _q_grid(q_min: float, q_max: float, steps: int) -> np.ndarray:
    if not (0.0 < q_min < q_max < 1.0):
        raise ValueError(f"need 0 < q_min < q_max < 1, got {q_min!r}, {q_max!r}")
    if int(steps) != steps or steps < 2:
        raise ValueError(f"steps must be an integer >= 2, got {steps!r}")
    grid = np.linspace(q_min, q_max, int(steps))
    grid[-1] = q_max
    return grid


def _sweep_point(q: float, sim_template: SimConfig | None, n_reps: int) -> SweepRow:
    channel = ChannelModel(q)
    sol = solve_optimal(channel)
    sim_mean = sim_se = None
    if sim_template is not None:
        policy = Greedy() if sol.regime is Regime.GREEDY else Threshold(sol.lambda_prime)
        cfg = replace(sim_template, channel=channel, policy=policy)
        summary = run_replications(cfg, n_reps)
        sim_mean, sim_se = summary.mean, summary.std_error
    return SweepRow(
        q=q,
        lambda_prime=sol.lambda_prime,
        lambda_star_b1=sol.lambda_star,
        greedy_aoi=greedy_aoi(channel),
        b_inf_bound=infinite_battery_benchmark(channel),
        sim_aoi_mean=sim_mean,
        sim_aoi_stderr=sim_se,
        regime=sol.regime,
    )


def sweep_q(
    q_min: float = DEFAULT_Q_MIN,
    q_max: float = DEFAULT_Q_MAX,
    steps: int = DEFAULT_STEPS,
    sim_template: SimConfig | None = None,
    n_reps: int = DEFAULT_SIM_REPS,
) -> list[SweepRow]:
    """Analytic optimum (and optionally simulation) on a uniform q grid.

    The grid includes both endpoints. When ``sim_template`` is given, its
    channel and policy are replaced per grid point by the optimal policy,
    and every grid point reuses the template seed (common random numbers).
    """
    return [_sweep_point(float(q), sim_template, n_reps) for q in _q_grid(q_min, q_max, steps)]


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.9g}"


def write_sweep_csv(rows: Iterable[SweepRow], fh: TextIO) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in rows:
        cells = [r.q, r.lambda_prime, r.lambda_star_b1, r.greedy_aoi, r.b_inf_bound, r.sim_aoi_mean, r.sim_aoi_stderr]
        fh.write(",".join(_fmt(c) for c in cells) + "," + r.regime.value + "\n")


@dataclass(frozen=True)
class ValidationRow:
    quantity: str
    analytic: float
    simulated: float
    std_error: float
    z: float

    @property
    def flagged(self) -> bool:
        return not abs(self.z) <= Z_FLAG


@dataclass(frozen=True)
class ValidationReport:
    q: float
    regime: Regime
    lambda_prime: float
    n_epochs: int
    seed: int
    rows: tuple[ValidationRow, ...]

    @property
    def passed(self) -> bool:
        return not any(r.flagged for r in self.rows)

    def row(self, quantity: str) -> ValidationRow:
        return next(r for r in self.rows if r.quantity == quantity)


def _row(name: str, analytic: float, est: EstimateWithError) -> ValidationRow:
    return ValidationRow(name, analytic, est.mean, est.std_error, est.z_score(analytic))


def validate_theory(q: float, n_epochs: int, seed: int = 0, engine: str = "auto") -> ValidationReport:
    """Simulate the optimal unit-battery policy and z-score it against theory.

    Compared quantities: mean inter-attempt time, mean epoch length, mean
    epoch area, attempts per epoch and the long-term average AoI.
    """
    channel = ChannelModel(q)
    sol = solve_optimal(channel)
    policy = Greedy() if sol.regime is Regime.GREEDY else Threshold(sol.lambda_prime)
    res = run_simulation(SimConfig(channel, policy, n_epochs=n_epochs, seed=seed, engine=engine))
    rows = (
        _row("E[x]", sol.expected_x, res.inter_attempt_estimate()),
        _row("E[y]", sol.expected_epoch_length, mean_estimate(res.epoch_lengths)),
        _row("E[R]", sol.expected_epoch_area, mean_estimate(res.epoch_areas)),
        _row("attempts", 1.0 / (1.0 - q), mean_estimate(res.epoch_attempts)),
        _row("lambda_star", sol.lambda_star, res.aoi_estimate()),
    )
    return ValidationReport(q, sol.regime, sol.lambda_prime, n_epochs, seed, rows)


def format_report(report: ValidationReport) -> str:
    lines = [
        f"# q={report.q:.9f} regime={report.regime.value} lambda_prime={report.lambda_prime:.9f} "
        f"epochs={report.n_epochs} seed={report.seed}",
        "quantity,analytic,simulated,std_error,z,status",
    ]
    for r in report.rows:
        status = "FLAG" if r.flagged else "ok"
        lines.append(f"{r.quantity},{r.analytic:.9f},{r.simulated:.9f},{r.std_error:.9f},{r.z:.3f},{status}")
    lines.append(f"result={'pass' if report.passed else 'fail'}")
    return "\n".join(lines) + "\n"
