"""Estimators with standard errors and i.i.d. screens for epoch sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "EstimateWithError",
    "IidReport",
    "iid_diagnostics",
    "mean_estimate",
    "ratio_estimator",
]

IID_MIN_SAMPLES = 100
AUTOCORR_GATE = 4.0  # |rho_1| <= AUTOCORR_GATE / sqrt(n)
SPLIT_HALF_GATE = 3.0  # |z| <= SPLIT_HALF_GATE


@dataclass(frozen=True)
class EstimateWithError:
    mean: float
    std_error: float
    n: int

    def z_score(self, reference: float) -> float:
        diff = self.mean - reference
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def mean_estimate(values: Sequence[float] | np.ndarray) -> EstimateWithError:
    """Sample mean with the usual ``s / sqrt(n)`` standard error."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("cannot estimate a mean from an empty sample")
    mean = math.fsum(x) / n
    if n == 1:
        return EstimateWithError(mean, 0.0, 1)
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return EstimateWithError(mean, math.sqrt(var / n), n)


def ratio_estimator(areas, lengths) -> EstimateWithError:
    """Renewal-reward estimate ``sum(areas) / sum(lengths)``.

    The standard error is the delta-method one: with ``r`` the ratio and
    ``d_i = area_i - r * length_i``, ``se = sd(d) / (sqrt(n) * mean(length))``,
    which carries the area/length covariance. It is 0 for a single epoch.
    """
    a = np.asarray(areas, dtype=float)
    y = np.asarray(lengths, dtype=float)
    if a.shape != y.shape or a.ndim != 1:
        raise ValueError("areas and lengths must be 1-D sequences of equal length")
    n = a.size
    if n == 0:
        raise ValueError("ratio estimator needs at least one epoch")
    if np.any(y <= 0.0):
        raise ValueError("epoch lengths must be positive")

    sum_y = math.fsum(y)
    ratio = math.fsum(a) / sum_y
    if n == 1:
        return EstimateWithError(ratio, 0.0, 1)
    d = a - ratio * y
    var_d = math.fsum(d * d) / (n - 1)
    return EstimateWithError(ratio, math.sqrt(var_d / n) / (sum_y / n), n)


@dataclass(frozen=True)
class IidReport:
    n: int
    lag1_autocorr: float
    autocorr_bound: float
    split_half_mean_z: float
    split_half_var_z: float

    @property
    def autocorr_ok(self) -> bool:
        return abs(self.lag1_autocorr) <= self.autocorr_bound

    @property
    def split_half_ok(self) -> bool:
        return abs(self.split_half_mean_z) <= SPLIT_HALF_GATE and abs(self.split_half_var_z) <= SPLIT_HALF_GATE

    @property
    def passed(self) -> bool:
        return self.autocorr_ok and self.split_half_ok


def _lag1_autocorr(x: np.ndarray) -> float:
    d = x - x.mean()
    denom = float(np.dot(d, d))
    if denom == 0.0:
        return 0.0
    return float(np.dot(d[:-1], d[1:])) / denom


def _variance_and_se(x: np.ndarray) -> tuple[float, float]:
    # se of the sample variance from the fourth central moment
    d = x - x.mean()
    m2 = float(np.mean(d**2))
    m4 = float(np.mean(d**4))
    return m2, math.sqrt(max(m4 - m2 * m2, 0.0) / x.size)


def iid_diagnostics(lengths) -> IidReport:
    """Screen a sequence of epoch lengths for serial dependence and drift.

    Reports the lag-1 sample autocorrelation (gate ``4/sqrt(n)``) and
    z-scores comparing the mean and variance of the first and second halves
    (gate 3). These are loose screens, not calibrated tests.
    """
    x = np.asarray(lengths, dtype=float)
    n = x.size
    if n < IID_MIN_SAMPLES:
        raise ValueError(f"iid diagnostics need at least {IID_MIN_SAMPLES} samples, got {n}")

    first, second = x[: n // 2], x[n // 2 :]
    m1, m2 = mean_estimate(first), mean_estimate(second)
    mean_se = math.hypot(m1.std_error, m2.std_error)
    mean_z = (m1.mean - m2.mean) / mean_se if mean_se > 0.0 else 0.0

    v1, se1 = _variance_and_se(first)
    v2, se2 = _variance_and_se(second)
    var_se = math.hypot(se1, se2)
    var_z = (v1 - v2) / var_se if var_se > 0.0 else 0.0

    return IidReport(
        n=n,
        lag1_autocorr=_lag1_autocorr(x),
        autocorr_bound=AUTOCORR_GATE / math.sqrt(n),
        split_half_mean_z=mean_z,
        split_half_var_z=var_z,
    )
