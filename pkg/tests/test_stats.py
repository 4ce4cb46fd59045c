import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ehaoi.stats import EstimateWithError, iid_diagnostics, mean_estimate, ratio_estimator


def ar1(n, phi, rng):
    e = rng.exponential(size=n)
    x = np.empty(n)
    x[0] = e[0]
    for i in range(1, n):
        x[i] = phi * x[i - 1] + e[i]
    return x


class TestRatioEstimator:
    def test_single_epoch(self):
        est = ratio_estimator([0.5], [1.0])
        assert est == EstimateWithError(0.5, 0.0, 1)

    def test_deterministic_epochs(self):
        c = 1.7
        y = np.full(50, c)
        est = ratio_estimator(0.5 * y**2, y)
        assert est.mean == pytest.approx(c / 2, rel=1e-15)
        assert est.std_error == pytest.approx(0.0, abs=1e-15)

    def test_errors(self):
        with pytest.raises(ValueError):
            ratio_estimator([], [])
        with pytest.raises(ValueError):
            ratio_estimator([1.0, 2.0], [1.0])
        with pytest.raises(ValueError):
            ratio_estimator([1.0], [0.0])

    def test_std_error_matches_replication_spread(self, rng):
        # delta-method se vs empirical spread of the ratio over many batches
        batches = []
        ses = []
        for _ in range(400):
            y = rng.exponential(size=500)
            est = ratio_estimator(0.5 * y**2, y)
            batches.append(est.mean)
            ses.append(est.std_error)
        assert np.mean(ses) == pytest.approx(np.std(batches, ddof=1), rel=0.15)

    def test_exp_epochs_recover_unit_aoi(self, rng):
        y = rng.exponential(size=200_000)
        est = ratio_estimator(0.5 * y**2, y)
        assert abs(est.z_score(1.0)) < 4

    @given(st.lists(st.floats(0.01, 100), min_size=2, max_size=50), st.floats(1e-3, 1e3))
    def test_scale_equivariance(self, lengths, c):
        y = np.array(lengths)
        a = 0.5 * y**2
        base = ratio_estimator(a, y)
        scaled = ratio_estimator(a * c * c, y * c)
        assert scaled.mean == pytest.approx(c * base.mean, rel=1e-9)
        assert scaled.std_error == pytest.approx(c * base.std_error, rel=1e-6, abs=1e-12)


def test_mean_estimate():
    est = mean_estimate([1.0, 2.0, 3.0, 4.0])
    assert est.mean == 2.5
    assert est.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert mean_estimate([3.0]).std_error == 0.0
    with pytest.raises(ValueError):
        mean_estimate([])


def test_z_score_zero_error():
    assert EstimateWithError(1.0, 0.0, 1).z_score(1.0) == 0.0
    assert EstimateWithError(1.0, 0.0, 1).z_score(0.0) == float("inf")


class TestIidDiagnostics:
    def test_iid_exponential_passes(self, rng):
        rep = iid_diagnostics(rng.exponential(size=100_000))
        assert rep.passed
        assert rep.autocorr_bound == pytest.approx(4 / np.sqrt(100_000))

    def test_ar1_fails(self, rng):
        x = ar1(100_000, 0.9, rng)
        oracle = np.corrcoef(x[:-1], x[1:])[0, 1]
        rep = iid_diagnostics(x)
        assert rep.lag1_autocorr == pytest.approx(oracle, abs=1e-3)
        assert rep.lag1_autocorr == pytest.approx(0.9, abs=0.01)
        assert not rep.autocorr_ok and not rep.passed

    def test_drift_fails_split_half(self, rng):
        x = rng.exponential(size=20_000)
        x[10_000:] *= 1.2
        rep = iid_diagnostics(x)
        assert not rep.split_half_ok

    def test_too_short(self):
        with pytest.raises(ValueError):
            iid_diagnostics(np.ones(99))

    def test_mean_is_order_free(self, rng):
        x = rng.exponential(size=1000)
        assert mean_estimate(x).mean == pytest.approx(mean_estimate(rng.permutation(x)).mean, rel=1e-14)
        assert iid_diagnostics(np.sort(x)).lag1_autocorr > 0.9
