"""Update policies as waiting functions of the delay to the next energy arrival.

A policy sees only ``tau``, the time from its previous attempt until energy
is available again, plus the wall-clock time of that attempt. Erasure
outcomes are never passed in, so no policy can react to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "BestEffortUniform",
    "Greedy",
    "PolicySpec",
    "Threshold",
    "describe",
    "next_attempt_time",
    "waiting_time",
    "waiting_times",
]


@dataclass(frozen=True)
class Threshold:
    """Transmit at ``max(lambda_prime, tau)`` after the previous attempt."""

    lambda_prime: float

    def __post_init__(self):
        if not (math.isfinite(self.lambda_prime) and self.lambda_prime >= 0.0):
            raise ValueError(f"threshold must be finite and >= 0, got {self.lambda_prime!r}")


@dataclass(frozen=True)
class Greedy:
    """Zero-wait: transmit as soon as energy is available."""


@dataclass(frozen=True)
class BestEffortUniform:
    """Transmit on the grid ``k * period`` (anchored at 0) whenever energy is available."""

    period: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0.0):
            raise ValueError(f"period must be finite and > 0, got {self.period!r}")


PolicySpec = Union[Threshold, Greedy, BestEffortUniform]


def next_attempt_time(policy: PolicySpec, tau: float, clock: float) -> float:
    """Wall-clock time of the next attempt given the previous one at ``clock``.

    Uniform grid times are returned as ``k * period`` so they do not drift.
    Energy arriving exactly on a grid point is usable at that point.
    """
    if isinstance(policy, Greedy):
        return clock + tau
    if isinstance(policy, Threshold):
        return clock + max(policy.lambda_prime, tau)
    if isinstance(policy, BestEffortUniform):
        period = policy.period
        k = math.ceil((clock + tau) / period)
        k_min = math.floor(clock / period) + 1
        return max(k, k_min) * period
    raise TypeError(f"unknown policy {policy!r}")


def waiting_time(policy: PolicySpec, tau: float, attempt_epoch_clock: float = 0.0) -> float:
    """Delay from the previous attempt to the next one; never less than ``tau``."""
    if isinstance(policy, Greedy):
        return tau
    if isinstance(policy, Threshold):
        return max(policy.lambda_prime, tau)
    return next_attempt_time(policy, tau, attempt_epoch_clock) - attempt_epoch_clock


def waiting_times(policy: PolicySpec, taus: np.ndarray) -> np.ndarray:
    """Vectorised :func:`waiting_time` for the clock-free policies."""
    if isinstance(policy, Greedy):
        return taus
    if isinstance(policy, Threshold):
        return np.maximum(policy.lambda_prime, taus)
    raise TypeError(f"{type(policy).__name__} depends on the wall clock; evaluate it per attempt")


def describe(policy: PolicySpec) -> str:
    if isinstance(policy, Greedy):
        return "greedy"
    if isinstance(policy, Threshold):
        return f"threshold:{policy.lambda_prime:.9f}"
    return f"uniform:{policy.period:.9f}"
