"""Event-driven Monte Carlo of an energy harvesting sensor over an erasure channel.

Energy arrives as a unit-rate Poisson process, each transmission spends one
unit, and each transmission is erased independently with probability ``q``.
A successful update resets the age to zero (updates are delivered
instantly). Time 0 is a successful update, made with the initially full
battery, so the battery holds ``B - 1`` units right after it.

Engines
-------
``vectorized``
    Unit battery with a threshold or greedy policy. After each
    transmission the battery is empty, so by memorylessness the delay to
    the next arrival is a fresh ``exp(1)`` draw. Draws are made in chunks.
``stepwise``
    Same model as ``vectorized`` (any policy), one attempt at a time, with
    the erasure drawn at the moment of transmission. Since scalar and bulk
    draws from a numpy ``Generator`` agree, both engines produce the same
    trace for the same seed.
``event``
    Full arrival process with battery of any capacity, overflow counted.

Random streams
--------------
For seed ``s`` and replication ``r`` the arrival stream is PCG64 seeded by
``SeedSequence(s, spawn_key=(r, 0))`` and the channel stream by
``SeedSequence(s, spawn_key=(r, 1))``. Attempt ``k`` always uses channel
draw ``k``, whatever the policy, so two policies see the same channel.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import TextIO

import numpy as np

from .analytic import ChannelModel
from .policy import BestEffortUniform, PolicySpec, next_attempt_time, waiting_time, waiting_times
from .stats import EstimateWithError, mean_estimate, ratio_estimator

__all__ = [
    "ENGINES",
    "INF_PROXY_CAPACITY",
    "EpochRecord",
    "ReplicationSummary",
    "SimConfig",
    "SimResult",
    "run_replications",
    "run_simulation",
    "spawn_streams",
]

INF_PROXY_CAPACITY = 1000
CHUNK = 1 << 16
ENGINES = ("auto", "vectorized", "stepwise", "event")

ARRIVAL, ATTEMPT, SUCCESS = "ARRIVAL", "ATTEMPT", "SUCCESS"


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    Exactly one of ``n_epochs`` (stop at the N-th successful update) and
    ``horizon`` (stop at time T) is given. ``battery_capacity`` is a
    positive integer or ``math.inf``; infinity is simulated with a battery
    of ``INF_PROXY_CAPACITY`` units.
    """

    channel: ChannelModel
    policy: PolicySpec
    battery_capacity: int | float = 1
    n_epochs: int | None = None
    horizon: float | None = None
    seed: int = 0
    replication: int = 0
    engine: str = "auto"

    def __post_init__(self):
        if (self.n_epochs is None) == (self.horizon is None):
            raise ValueError("give exactly one of n_epochs and horizon")
        if self.n_epochs is not None and (int(self.n_epochs) != self.n_epochs or self.n_epochs < 1):
            raise ValueError(f"n_epochs must be a positive integer, got {self.n_epochs!r}")
        if self.horizon is not None and not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon!r}")
        b = self.battery_capacity
        if not (b == math.inf or (int(b) == b and b >= 1)):
            raise ValueError(f"battery capacity must be a positive integer or inf, got {b!r}")
        if not (0 <= self.seed < 2**64) or int(self.seed) != self.seed:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")

    @property
    def capacity(self) -> int:
        return INF_PROXY_CAPACITY if self.battery_capacity == math.inf else int(self.battery_capacity)

    def resolved_engine(self) -> str:
        if self.engine != "auto":
            return self.engine
        if self.capacity > 1:
            return "event"
        if isinstance(self.policy, BestEffortUniform):
            return "stepwise"
        return "vectorized"


@dataclass(frozen=True)
class EpochRecord:
    length: float
    attempts: int
    area: float


@dataclass(frozen=True, eq=False)
class SimResult:
    time_avg_aoi: float
    horizon: float
    n_success: int
    n_attempts: int
    epoch_lengths: np.ndarray = field(repr=False)
    epoch_attempts: np.ndarray = field(repr=False)
    epoch_areas: np.ndarray = field(repr=False)
    mean_inter_attempt: float
    inter_attempt_std: float
    mean_epoch_length: float
    mean_epoch_area: float
    final_partial_age_area: float
    n_overflow: int = 0
    max_battery: int = 0

    @property
    def degenerate(self) -> bool:
        return self.n_success == 0

    @property
    def mean_attempts(self) -> float:
        return float(np.mean(self.epoch_attempts)) if self.n_success else math.nan

    def epochs(self) -> list[EpochRecord]:
        return [
            EpochRecord(float(y), int(a), float(r))
            for y, a, r in zip(self.epoch_lengths, self.epoch_attempts, self.epoch_areas)
        ]

    def aoi_estimate(self) -> EstimateWithError:
        """Renewal-reward estimate of the average AoI over completed epochs."""
        return ratio_estimator(self.epoch_areas, self.epoch_lengths)

    def inter_attempt_estimate(self) -> EstimateWithError:
        se = self.inter_attempt_std / math.sqrt(self.n_attempts) if self.n_attempts > 1 else 0.0
        return EstimateWithError(self.mean_inter_attempt, se, self.n_attempts)

    def identical_to(self, other: "SimResult") -> bool:
        scalars = [
            "time_avg_aoi", "horizon", "n_success", "n_attempts", "mean_inter_attempt",
            "inter_attempt_std", "mean_epoch_length", "mean_epoch_area",
            "final_partial_age_area", "n_overflow", "max_battery",
        ]
        same = all(
            getattr(self, k) == getattr(other, k)
            or (math.isnan(getattr(self, k)) and math.isnan(getattr(other, k)))
            for k in scalars
        )
        return (
            same
            and np.array_equal(self.epoch_lengths, other.epoch_lengths)
            and np.array_equal(self.epoch_attempts, other.epoch_attempts)
            and np.array_equal(self.epoch_areas, other.epoch_areas)
        )


def spawn_streams(seed: int, replication: int = 0) -> tuple[np.random.Generator, np.random.Generator]:
    """(arrival, channel) generators for one replication."""
    arrivals = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replication, 0))))
    channel = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replication, 1))))
    return arrivals, channel


class _Trace:
    def __init__(self, fh: TextIO | None):
        self.fh = fh

    def __bool__(self):
        return self.fh is not None

    def emit(self, t: float, kind: str, battery: int, age: float):
        self.fh.write(f"{t:.9f},{kind},{battery},{age:.9f}\n")


class _Buffered:
    """Scalar reads from a generator, prefetched in chunks.

    Sequential draws are unaffected by chunking, so this matches one call
    per value exactly.
    """

    def __init__(self, draw, chunk: int = CHUNK):
        self._draw, self._chunk = draw, chunk
        self._buf: list[float] = []
        self._pos = 0

    def __call__(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._draw(self._chunk).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v


def _finalize(lengths, attempts, xs, horizon, n_attempts, tail, n_overflow=0, max_battery=0) -> SimResult:
    lengths = np.asarray(lengths, dtype=float)
    attempts = np.asarray(attempts, dtype=np.int64)
    xs = np.asarray(xs, dtype=float)
    areas = 0.5 * lengths * lengths
    n = lengths.size
    if xs.size:
        mean_x = math.fsum(xs) / xs.size
        std_x = math.sqrt(math.fsum((xs - mean_x) ** 2) / (xs.size - 1)) if xs.size > 1 else 0.0
    else:
        mean_x = std_x = math.nan
    total_area = math.fsum(areas)
    return SimResult(
        time_avg_aoi=(total_area + tail) / horizon if horizon > 0 else math.nan,
        horizon=horizon,
        n_success=n,
        n_attempts=n_attempts,
        epoch_lengths=lengths,
        epoch_attempts=attempts,
        epoch_areas=areas,
        mean_inter_attempt=mean_x,
        inter_attempt_std=std_x,
        mean_epoch_length=math.fsum(lengths) / n if n else math.nan,
        mean_epoch_area=total_area / n if n else math.nan,
        final_partial_age_area=tail,
        n_overflow=n_overflow,
        max_battery=max_battery,
    )


def _run_vectorized(cfg: SimConfig, arrivals, channel, trace: _Trace) -> SimResult:
    q = cfg.channel.q
    policy = cfg.policy
    target = cfg.n_epochs
    T = cfg.horizon

    clock = 0.0
    last_success = 0.0
    carry = 0  # attempts since the last success
    n_success = n_attempts = 0
    lengths, attempts, xs = [], [], []

    done = False
    while not done:
        tau = arrivals.standard_exponential(CHUNK)
        erased = channel.random(CHUNK) < q
        x = waiting_times(policy, tau)
        times = np.cumsum(np.concatenate(([clock], x)))[1:]

        m = CHUNK
        if T is not None:
            m = int(np.searchsorted(times, T, side="right"))
            done = m < CHUNK
        succ = np.flatnonzero(~erased[:m])
        if target is not None and succ.size >= target - n_success:
            succ = succ[: target - n_success]
            m = int(succ[-1]) + 1
            done = True

        if trace:
            prev = clock
            ls = last_success
            for j in range(m):
                t_arr = prev + tau[j]
                trace.emit(t_arr, ARRIVAL, 1, t_arr - ls)
                if erased[j]:
                    trace.emit(times[j], ATTEMPT, 0, times[j] - ls)
                else:
                    trace.emit(times[j], SUCCESS, 0, 0.0)
                    ls = times[j]
                prev = times[j]

        if succ.size:
            s_times = times[succ]
            lengths.append(s_times - np.concatenate(([last_success], s_times[:-1])))
            attempts.append(succ - np.concatenate(([-1 - carry], succ[:-1])))
            last_success = float(s_times[-1])
            carry = m - 1 - int(succ[-1])
            n_success += succ.size
        else:
            carry += m
        xs.append(x[:m])
        n_attempts += m
        if m:
            clock = float(times[m - 1])

    cat = lambda parts, dt: np.concatenate(parts) if parts else np.empty(0, dtype=dt)
    horizon = last_success if T is None else T
    tail = 0.0 if T is None else 0.5 * (T - last_success) ** 2
    return _finalize(cat(lengths, float), cat(attempts, np.int64), cat(xs, float),
                     horizon, n_attempts, tail, max_battery=1)


def _run_stepwise(cfg: SimConfig, arrivals, channel, trace: _Trace) -> SimResult:
    q = cfg.channel.q
    policy = cfg.policy
    target = cfg.n_epochs
    T = cfg.horizon

    clock = 0.0
    last_success = 0.0
    carry = 0
    n_attempts = 0
    lengths, attempts, xs = [], [], []

    while True:
        tau = arrivals.standard_exponential()
        t_next = next_attempt_time(policy, tau, clock)
        if T is not None and t_next > T:
            break
        x = waiting_time(policy, tau, clock)
        erased = channel.random() < q
        n_attempts += 1
        carry += 1
        if trace:
            t_arr = clock + tau
            trace.emit(t_arr, ARRIVAL, 1, t_arr - last_success)
            if erased:
                trace.emit(t_next, ATTEMPT, 0, t_next - last_success)
            else:
                trace.emit(t_next, SUCCESS, 0, 0.0)
        xs.append(x)
        if not erased:
            lengths.append(t_next - last_success)
            attempts.append(carry)
            carry = 0
            last_success = t_next
        clock = t_next
        if target is not None and len(lengths) == target:
            break

    horizon = last_success if T is None else T
    tail = 0.0 if T is None else 0.5 * (T - last_success) ** 2
    return _finalize(lengths, attempts, xs, horizon, n_attempts, tail, max_battery=1)


def _run_event(cfg: SimConfig, arrivals, channel, trace: _Trace) -> SimResult:
    q = cfg.channel.q
    policy = cfg.policy
    cap = cfg.capacity
    target = cfg.n_epochs
    T = cfg.horizon
    next_gap = _Buffered(arrivals.standard_exponential)
    next_u = _Buffered(channel.random)

    battery = cap - 1
    max_battery = battery
    overflow = 0
    clock = 0.0
    last_success = 0.0
    next_arrival = next_gap()
    carry = 0
    n_attempts = 0
    lengths, attempts, xs = [], [], []

    while True:
        tau = 0.0 if battery >= 1 else next_arrival - clock
        t_next = next_attempt_time(policy, tau, clock)
        stop_at = t_next if T is None or t_next <= T else T
        while next_arrival <= stop_at:
            if battery >= cap:
                overflow += 1
            else:
                battery += 1
                max_battery = max(max_battery, battery)
            if trace:
                trace.emit(next_arrival, ARRIVAL, battery, next_arrival - last_success)
            next_arrival += next_gap()
        if stop_at < t_next:
            break

        if battery < 1:
            raise RuntimeError(f"energy causality violated at t={t_next}")
        battery -= 1
        erased = next_u() < q
        n_attempts += 1
        carry += 1
        xs.append(t_next - clock)
        if erased:
            if trace:
                trace.emit(t_next, ATTEMPT, battery, t_next - last_success)
        else:
            if trace:
                trace.emit(t_next, SUCCESS, battery, 0.0)
            lengths.append(t_next - last_success)
            attempts.append(carry)
            carry = 0
            last_success = t_next
        clock = t_next
        if target is not None and len(lengths) == target:
            break

    horizon = last_success if T is None else T
    tail = 0.0 if T is None else 0.5 * (T - last_success) ** 2
    return _finalize(lengths, attempts, xs, horizon, n_attempts, tail,
                     n_overflow=overflow, max_battery=max_battery)


_ENGINE_FUNCS = {"vectorized": _run_vectorized, "stepwise": _run_stepwise, "event": _run_event}


def run_simulation(config: SimConfig, trace: TextIO | None = None) -> SimResult:
    """Simulate one run; the result is a deterministic function of ``config``.

    If ``trace`` is given, one ``time,kind,battery_after,age_after`` line
    is written per event (kind is ARRIVAL, ATTEMPT or SUCCESS; ATTEMPT
    means an erased transmission). The unit-battery engines only
    materialise the arrival that recharges the empty battery.
    """
    engine = config.resolved_engine()
    if engine in ("vectorized", "stepwise") and config.capacity != 1:
        raise ValueError(f"the {engine} engine requires battery capacity 1")
    if engine == "vectorized" and isinstance(config.policy, BestEffortUniform):
        raise ValueError("the vectorized engine does not support clock-aligned policies")
    arrivals, channel = spawn_streams(config.seed, config.replication)
    return _ENGINE_FUNCS[engine](config, arrivals, channel, _Trace(trace))


@dataclass(frozen=True, eq=False)
class ReplicationSummary:
    results: tuple[SimResult, ...]
    mean: float
    std_error: float

    @property
    def n_reps(self) -> int:
        return len(self.results)


def run_replications(config: SimConfig, n_reps: int, workers: int | None = None) -> ReplicationSummary:
    """Independent replications ``config.replication + i`` for ``i < n_reps``.

    The pooled standard error is the spread across replications; with a
    single replication it falls back to that run's delta-method error.
    Aggregation runs in replication order, so ``workers`` never changes the
    output.
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps!r}")
    configs = [replace(config, replication=config.replication + i) for i in range(n_reps)]
    if workers and workers > 1 and n_reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(run_simulation, configs))
    else:
        results = tuple(run_simulation(c) for c in configs)

    if n_reps == 1:
        only = results[0]
        se = only.aoi_estimate().std_error if only.n_success else math.nan
        return ReplicationSummary(results, only.time_avg_aoi, se)
    est = mean_estimate([r.time_avg_aoi for r in results])
    return ReplicationSummary(results, est.mean, est.std_error)
