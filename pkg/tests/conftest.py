"""Independent oracles shared by the test modules.

Nothing here imports the solver; the oracles re-derive every quantity from
the model (integrals over exp(1), brute-force root finding).
"""

import math

import numpy as np
import pytest
from scipy import integrate


def moment_oracle(lambda_prime, k):
    """E[max(lambda_prime, tau)^k], tau ~ exp(1), by adaptive quadrature."""
    f = lambda t: max(lambda_prime, t) ** k * math.exp(-t)
    head = integrate.quad(f, 0.0, lambda_prime, epsabs=1e-13, epsrel=1e-13)[0] if lambda_prime > 0 else 0.0
    tail = integrate.quad(f, lambda_prime, math.inf, epsabs=1e-13, epsrel=1e-13)[0]
    return head + tail


def grid_bisection_root(f, lo=0.0, hi=10.0, n_grid=10_001, iters=200):
    """First sign change of ``f`` on a dense grid, refined by plain bisection."""
    xs = np.linspace(lo, hi, n_grid)
    vals = [f(x) for x in xs]
    for i in range(n_grid - 1):
        if vals[i] == 0.0:
            return float(xs[i])
        if vals[i] > 0.0 > vals[i + 1]:
            a, b = float(xs[i]), float(xs[i + 1])
            break
    else:
        raise AssertionError("no sign change on grid")
    for _ in range(iters):
        m = 0.5 * (a + b)
        if f(m) > 0.0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def threshold_objective_oracle(lambda_prime, q):
    """E[R] - lambda E[y] for the lambda'-threshold policy, from raw moments.

    Uses the quadrature moments and the geometric attempt count; the
    Dinkelbach parameter is lambda' + 2q/(1-q) E[x].
    """
    ex = moment_oracle(lambda_prime, 1)
    ex2 = moment_oracle(lambda_prime, 2)
    ey = ex / (1 - q)
    er = 0.5 * ex2 / (1 - q) + q * ex**2 / (1 - q) ** 2
    lam = lambda_prime + 2 * q / (1 - q) * ex
    return er - lam * ey


# Frozen by grid_bisection_root on threshold_objective_oracle (and on
# exp(-l) - l^2/2 for q = 0).
GOLDEN_Q0_ROOT = 0.9012010317296661
GOLDEN_Q03_LAMBDA_PRIME = 0.4704714432281646
GOLDEN_Q03_LAMBDA_STAR = 1.4091964099730936


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
