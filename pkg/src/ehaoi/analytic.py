"""Closed-form epoch moments and the optimal threshold/greedy solver.

All quantities assume unit-rate Poisson energy arrivals, unit transmission
cost and a unit battery. Under an arrival rate ``mu`` every time quantity
would scale as ``1/mu``; this is not exposed as a parameter.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

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
]

BRACKET_START = 2.0
BRACKET_CAP = 64.0
BRACKET_WIDTH_TOL = 1e-10


class Regime(str, enum.Enum):
    THRESHOLD = "threshold"
    GREEDY = "greedy"


class BracketError(RuntimeError):
    """No sign change of the threshold objective below the bracket cap."""


@dataclass(frozen=True)
class ChannelModel:
    """Erasure channel with per-transmission erasure probability ``q``.

    ``q`` must lie in the open interval (0, 1). The no-erasure channel
    ``q = 0`` is only available through :meth:`no_erasure`, for checking
    results against the classical perfect-channel solution.
    """

    q: float
    allow_zero: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        q = float(self.q)
        object.__setattr__(self, "q", q)
        if not math.isfinite(q) or q >= 1.0 or q < 0.0 or (q == 0.0 and not self.allow_zero):
            raise ValueError(f"erasure probability must satisfy 0 < q < 1, got {self.q!r}")

    @classmethod
    def no_erasure(cls) -> "ChannelModel":
        return cls(0.0, allow_zero=True)

    @property
    def regime(self) -> Regime:
        # q = 1/2 is a tie (both regimes give 2); fixed to threshold.
        return Regime.THRESHOLD if self.q <= 0.5 else Regime.GREEDY


@dataclass(frozen=True)
class SolverResult:
    regime: Regime
    lambda_prime: float
    lambda_star: float
    expected_x: float
    expected_x_sq: float
    expected_epoch_length: float
    expected_epoch_area: float
    root_residual: float


def greedy_aoi(channel: ChannelModel) -> float:
    """Long-term average AoI of the zero-wait policy, ``1/(1-q)``."""
    return 1.0 / (1.0 - channel.q)


def p_greedy(lam: float, channel: ChannelModel) -> float:
    """Auxiliary objective ``E[R] - lam*E[y]`` evaluated at ``x(tau) = tau``."""
    q = channel.q
    return (1.0 - lam * (1.0 - q)) / (1.0 - q) ** 2


def expected_inter_attempt(lambda_prime: float) -> float:
    """Mean of ``max(lambda_prime, tau)`` for ``tau ~ exp(1)``."""
    return lambda_prime + math.exp(-lambda_prime)


def expected_inter_attempt_sq(lambda_prime: float) -> float:
    """Second moment of ``max(lambda_prime, tau)`` for ``tau ~ exp(1)``."""
    return lambda_prime**2 + 2.0 * (lambda_prime + 1.0) * math.exp(-lambda_prime)


def expected_epoch_length(lambda_prime: float, channel: ChannelModel) -> float:
    return expected_inter_attempt(lambda_prime) / (1.0 - channel.q)


def expected_epoch_area(lambda_prime: float, channel: ChannelModel) -> float:
    """Expected area under the age curve over one epoch.

    The epoch holds a geometric number of attempts; the cross terms of the
    squared sum contribute ``q E[x]^2 / (1-q)^2``.
    """
    q = channel.q
    ex = expected_inter_attempt(lambda_prime)
    ex2 = expected_inter_attempt_sq(lambda_prime)
    return 0.5 * ex2 / (1.0 - q) + q * ex * ex / (1.0 - q) ** 2


def lambda_from_lambda_prime(lambda_prime: float, channel: ChannelModel) -> float:
    """Dinkelbach parameter whose optimal waiting threshold is ``lambda_prime``.

    Strictly increasing on ``lambda_prime >= 0``, starting at ``2q/(1-q)``.
    """
    q = channel.q
    return ((1.0 + q) * lambda_prime + 2.0 * q * math.exp(-lambda_prime)) / (1.0 - q)


def p_threshold(lambda_prime: float, channel: ChannelModel) -> float:
    """Auxiliary objective at the optimum for the threshold ``lambda_prime``.

    Equals ``E[R] - lam*E[y]`` with ``lam = lambda_from_lambda_prime(...)``;
    strictly decreasing in ``lambda_prime``.
    """
    q = channel.q
    e = math.exp(-lambda_prime)
    num = (1.0 - q) * (e - 0.5 * lambda_prime**2) - q * (lambda_prime + e) ** 2
    return num / (1.0 - q) ** 2


def _threshold_root(channel: ChannelModel, tol: float) -> tuple[float, float]:
    p_lo = p_threshold(0.0, channel)
    if abs(p_lo) <= tol:
        return 0.0, abs(p_lo)
    if p_lo < 0.0:
        raise BracketError(f"p(0) = {p_lo:.3e} < 0: no non-negative threshold for q={channel.q}")

    hi = BRACKET_START
    while p_threshold(hi, channel) >= 0.0:
        hi *= 2.0
        if hi > BRACKET_CAP:
            raise BracketError(f"no sign change of p below lambda'={BRACKET_CAP} for q={channel.q}")

    lo = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        p_mid = p_threshold(mid, channel)
        if abs(p_mid) <= tol or hi - lo <= BRACKET_WIDTH_TOL:
            return mid, abs(p_mid)
        if p_mid > 0.0:
            lo = mid
        else:
            hi = mid


def solve_optimal(channel: ChannelModel, tol: float = 1e-9) -> SolverResult:
    """Optimal waiting policy and its long-term average AoI.

    For ``q <= 1/2`` bisects ``p_threshold`` on ``[0, hi]`` (``hi`` found by
    doubling from 2) and maps the threshold to the optimal AoI. For
    ``q > 1/2`` the zero-wait policy is optimal.

    Raises:
        ValueError: if ``tol`` is not positive.
        BracketError: if no bracket is found below the hard cap.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")

    regime = channel.regime
    if regime is Regime.GREEDY:
        lambda_prime = 0.0
        lambda_star = greedy_aoi(channel)
        residual = abs(p_greedy(lambda_star, channel))
    else:
        lambda_prime, residual = _threshold_root(channel, tol)
        lambda_star = lambda_from_lambda_prime(lambda_prime, channel)

    return SolverResult(
        regime=regime,
        lambda_prime=lambda_prime,
        lambda_star=lambda_star,
        expected_x=expected_inter_attempt(lambda_prime),
        expected_x_sq=expected_inter_attempt_sq(lambda_prime),
        expected_epoch_length=expected_epoch_length(lambda_prime, channel),
        expected_epoch_area=expected_epoch_area(lambda_prime, channel),
        root_residual=residual,
    )


def infinite_battery_benchmark(channel: ChannelModel) -> float:
    """Optimal AoI with an unbounded battery, a lower bound for every ``q``."""
    q = channel.q
    return (1.0 + q) / (2.0 * (1.0 - q))
