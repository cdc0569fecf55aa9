import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cellts import ArmaModel, is_stable, simulate
from cellts.estimators import (
    EstimationError,
    autocovariance,
    default_long_order,
    hannan_rissanen,
    yule_walker,
    yule_walker_from_acov,
)
from cellts.lagpoly import LagPolynomial


def test_autocovariance_lag0_is_biased_variance():
    y = np.random.default_rng(0).normal(size=100)
    assert autocovariance(y, 0)[0] == pytest.approx(y.var(ddof=0))


def test_autocovariance_matches_direct_sum():
    y = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    yc = y - y.mean()
    g = autocovariance(y, 2)
    assert g[2] == pytest.approx(sum(yc[t] * yc[t - 2] for t in range(2, 5)) / 5)


def test_autocovariance_ar1_ratio():
    g = autocovariance(simulate(ArmaModel((0.5,)), 20000, seed=1), 1)
    assert abs(g[1] / g[0] - 0.5) <= 0.03


def test_autocovariance_white_noise():
    g = autocovariance(simulate(ArmaModel(), 20000, seed=2), 3)
    assert abs(g[3] / g[0]) < 0.03


def test_autocovariance_rejects_large_lag():
    with pytest.raises(ValueError):
        autocovariance(np.ones(5), 5)


def test_yule_walker_exact_ar1_autocovariances():
    gamma = 0.5 ** np.arange(3) / (1 - 0.25)
    phi, s2 = yule_walker_from_acov(gamma, 2)
    np.testing.assert_allclose(phi, [0.5, 0.0], atol=1e-14)
    assert s2 == pytest.approx(1.0, abs=1e-14)


def test_yule_walker_exact_ar3(ar3):
    from conftest import ar_autocovariances

    gamma = ar_autocovariances(ar3.phi, 1.0, 3)
    phi, s2 = yule_walker_from_acov(gamma, 3)
    np.testing.assert_allclose(phi, ar3.phi, atol=1e-12)
    assert s2 == pytest.approx(1.0, abs=1e-12)


def test_yule_walker_singular():
    with pytest.raises(EstimationError):
        yule_walker_from_acov([1.0, 1.0, 1.0], 2)


def test_yule_walker_ar3_monte_carlo(ar3):
    fits = np.array([yule_walker(simulate(ar3, 5000, seed=s), 3).phi for s in range(20)])
    assert np.all(np.abs(fits.mean(axis=0) - ar3.phi) < 0.05)


def test_yule_walker_white_noise_order1():
    fit = yule_walker(simulate(ArmaModel(), 20000, seed=5), 1)
    assert abs(fit.phi[0]) <= 0.03
    assert fit.order == 1 and fit.sigma > 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=12, max_size=60), st.integers(1, 5))
def test_yule_walker_fit_is_stable(y, order):
    y = np.asarray(y)
    if np.ptp(y) < 1e-6:
        return
    try:
        fit = yule_walker(y, order)
    except EstimationError:
        return
    assert is_stable(LagPolynomial.ar(fit.phi))


def test_hr_q0_equals_least_squares(ar3):
    y = simulate(ar3, 800, seed=3).values
    m = 10
    fit = hannan_rissanen(y, 3, 0, m)
    yd = y - y.mean()
    X = np.column_stack([yd[m - k : -k] for k in range(1, 4)])
    beta, *_ = np.linalg.lstsq(X, yd[m:], rcond=None)
    np.testing.assert_allclose(fit.phi, beta, atol=1e-8)
    assert fit.theta.size == 0
    assert fit.sigma == pytest.approx(np.sqrt(np.mean((yd[m:] - X @ beta) ** 2)))


def test_hr_arma11_monte_carlo():
    model = ArmaModel((0.5,), (0.4,))
    fits = [hannan_rissanen(simulate(model, 10000, seed=s), 1, 1, 20) for s in range(20)]
    assert abs(np.mean([f.phi[0] for f in fits]) - 0.5) < 0.05
    assert abs(np.mean([f.theta[0] for f in fits]) - 0.4) < 0.07


def test_hr_ar3_single_run(ar3):
    fit = hannan_rissanen(simulate(ar3, 1000, seed=0), 3, 0, 10)
    assert np.all(np.abs(fit.phi - ar3.phi) <= 0.1)


def test_hr_validation():
    y = np.random.default_rng(0).normal(size=100)
    with pytest.raises(ValueError):
        hannan_rissanen(y, 2, 1, m=2)
    with pytest.raises(ValueError):
        hannan_rissanen(y[:20], 2, 1, m=10)


def test_hr_default_long_order():
    assert default_long_order(1000, 3, 0) == 12
    assert default_long_order(50, 4, 4) == 8
