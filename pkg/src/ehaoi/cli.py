"""Command-line entry point: ``ehaoi {solve,simulate,sweep,validate}``.

Exit status is 0 on success, 1 when ``validate`` flags a quantity, and 2
on usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys

from .analytic import ChannelModel, solve_optimal
from .experiments import (
    DEFAULT_Q_MAX,
    DEFAULT_Q_MIN,
    DEFAULT_SIM_EPOCHS,
    DEFAULT_SIM_REPS,
    DEFAULT_STEPS,
    format_report,
    optimal_policy,
    sweep_q,
    validate_theory,
    write_sweep_csv,
)
from .policy import BestEffortUniform, Greedy, Threshold, describe
from .simulator import INF_PROXY_CAPACITY, SimConfig, run_replications, run_simulation


def _probability(text: str) -> float:
    try:
        q = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < q < 1.0:
        raise argparse.ArgumentTypeError(f"erasure probability must be in (0, 1), got {text}")
    return q


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64), got {text}")
    return v


def _battery(text: str) -> int | float:
    if text.lower() in ("inf", "infinite"):
        return math.inf
    return _positive_int(text)


def _policy(text: str) -> tuple[str, float | None]:
    kind, _, arg = text.partition(":")
    if kind in ("optimal", "greedy") and not arg:
        return kind, None
    if kind == "threshold" and arg:
        try:
            v = float(arg)
        except ValueError:
            v = -1.0
        if math.isfinite(v) and v >= 0:
            return kind, v
    if kind == "uniform" and arg:
        return kind, _positive_float(arg)
    raise argparse.ArgumentTypeError(
        f"policy must be threshold:<lambda'>, optimal, greedy or uniform:<period>; got {text!r}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehaoi",
        description="Age-optimal status updates for a unit-battery energy harvesting sensor over an erasure channel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimal threshold and long-term average AoI")
    p.add_argument("--q", type=_probability, required=True)
    p.add_argument("--tol", type=_positive_float, default=1e-9)

    p = sub.add_parser("simulate", help="Monte Carlo run of a policy")
    p.add_argument("--q", type=_probability, required=True)
    p.add_argument("--policy", type=_policy, default=("optimal", None))
    stop = p.add_mutually_exclusive_group()
    stop.add_argument("--epochs", type=_positive_int, help="stop after N successful updates (default 100000)")
    stop.add_argument("--horizon", type=_positive_float, help="stop at simulated time T")
    p.add_argument("--battery", type=_battery, default=1, help="capacity in units, or inf")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--trace", metavar="PATH", help="write the event trace (single replication only)")

    p = sub.add_parser("sweep", help="optimal AoI over a q grid as CSV")
    p.add_argument("--q-min", type=_probability, default=DEFAULT_Q_MIN)
    p.add_argument("--q-max", type=_probability, default=DEFAULT_Q_MAX)
    p.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS)
    p.add_argument("--simulate", action="store_true", help="fill the simulation columns")
    p.add_argument("--epochs", type=_positive_int, default=DEFAULT_SIM_EPOCHS)
    p.add_argument("--reps", type=_positive_int, default=DEFAULT_SIM_REPS)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default="-", metavar="PATH", help="CSV path, '-' for stdout")

    p = sub.add_parser("validate", help="compare simulation of the optimal policy with theory")
    p.add_argument("--q", type=_probability, required=True)
    p.add_argument("--epochs", type=_positive_int, default=1_000_000)
    p.add_argument("--seed", type=_seed, default=0)
    return parser


def _kv(out, key: str, value) -> None:
    if isinstance(value, float):
        value = f"{value:.9f}"
    out.write(f"{key}={value}\n")


def _cmd_solve(args, out) -> int:
    sol = solve_optimal(ChannelModel(args.q), args.tol)
    out.write(f"# q={args.q:.9f}: {sol.regime.value} policy, long-term average AoI {sol.lambda_star:.6f}\n")
    _kv(out, "regime", sol.regime.value)
    _kv(out, "q", args.q)
    _kv(out, "lambda_prime", sol.lambda_prime)
    _kv(out, "lambda_star", sol.lambda_star)
    _kv(out, "expected_x", sol.expected_x)
    _kv(out, "expected_x_sq", sol.expected_x_sq)
    _kv(out, "expected_epoch_length", sol.expected_epoch_length)
    _kv(out, "expected_epoch_area", sol.expected_epoch_area)
    _kv(out, "root_residual", f"{sol.root_residual:.3e}")
    return 0


def _cmd_simulate(args, out, err) -> int:
    channel = ChannelModel(args.q)
    kind, arg = args.policy
    analytic = None
    if kind == "optimal":
        policy = optimal_policy(channel)
        analytic = solve_optimal(channel).lambda_star
    elif kind == "greedy":
        policy = Greedy()
    elif kind == "threshold":
        policy = Threshold(arg)
    else:
        policy = BestEffortUniform(arg)

    if args.trace and args.reps > 1:
        err.write("ehaoi simulate: --trace requires --reps 1\n")
        return 2
    epochs = args.epochs if args.horizon is None and args.epochs else None
    if args.horizon is None and epochs is None:
        epochs = DEFAULT_SIM_EPOCHS
    cfg = SimConfig(channel, policy, battery_capacity=args.battery, n_epochs=epochs,
                    horizon=args.horizon, seed=args.seed)

    if args.trace:
        with open(args.trace, "w", newline="\n") as fh:
            res = run_simulation(cfg, trace=fh)
        results, mean = (res,), res.time_avg_aoi
        se = res.aoi_estimate().std_error if res.n_success else math.nan
    else:
        summary = run_replications(cfg, args.reps)
        results, mean, se = summary.results, summary.mean, summary.std_error

    battery = "inf" if args.battery == math.inf else str(args.battery)
    out.write(f"# simulate q={args.q:.9f} policy={describe(policy)} battery={battery} seed={args.seed}\n")
    _kv(out, "policy", describe(policy))
    _kv(out, "battery_capacity", cfg.capacity)
    if args.battery == math.inf:
        _kv(out, "battery_note", f"infinite battery simulated with {INF_PROXY_CAPACITY} units")
    _kv(out, "stop", f"epochs:{epochs}" if epochs else f"horizon:{args.horizon:.9f}")
    _kv(out, "reps", len(results))
    _kv(out, "time_avg_aoi", mean)
    _kv(out, "std_error", se)
    if analytic is not None:
        _kv(out, "analytic_lambda_star", analytic)
    _kv(out, "n_success", sum(r.n_success for r in results))
    _kv(out, "n_attempts", sum(r.n_attempts for r in results))
    _kv(out, "n_overflow", sum(r.n_overflow for r in results))
    first = results[0]
    _kv(out, "mean_inter_attempt", first.mean_inter_attempt)
    _kv(out, "mean_epoch_length", first.mean_epoch_length)
    _kv(out, "mean_epoch_area", first.mean_epoch_area)
    _kv(out, "mean_attempts", first.mean_attempts)
    _kv(out, "final_partial_age_area", first.final_partial_age_area)
    _kv(out, "degenerate", str(any(r.degenerate for r in results)).lower())
    return 0


def _cmd_sweep(args, out, err) -> int:
    if not args.q_min < args.q_max:
        err.write("ehaoi sweep: --q-min must be below --q-max\n")
        return 2
    if args.steps < 2:
        err.write("ehaoi sweep: --steps must be >= 2\n")
        return 2
    template = None
    if args.simulate:
        # channel and policy are replaced per grid point
        template = SimConfig(ChannelModel(0.5), Greedy(), n_epochs=args.epochs, seed=args.seed)
    rows = sweep_q(args.q_min, args.q_max, args.steps, template, args.reps)
    if args.out == "-":
        write_sweep_csv(rows, out)
    else:
        with open(args.out, "w", newline="\n") as fh:
            write_sweep_csv(rows, fh)
    return 0


def _cmd_validate(args, out) -> int:
    report = validate_theory(args.q, args.epochs, args.seed)
    out.write(format_report(report))
    return 0 if report.passed else 1


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "solve":
        return _cmd_solve(args, out)
    if args.command == "simulate":
        return _cmd_simulate(args, out, err)
    if args.command == "sweep":
        return _cmd_sweep(args, out, err)
    return _cmd_validate(args, out)


if __name__ == "__main__":
    sys.exit(main())
