import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cellts import ArmaModel, ModelError, TimeSeries, innovations, simulate
from cellts.arma import ma_filter
from cellts.contamination import OutlierSpec, inject


def test_ar1_lag1_autocorrelation():
    z = simulate(ArmaModel((0.5,), (), 1.0), 10000, seed=7).values
    zc = z - z.mean()
    rho1 = zc[1:] @ zc[:-1] / (zc @ zc)
    assert 0.45 <= rho1 <= 0.55


def test_white_noise_variance():
    z = simulate(ArmaModel((), (), 2.0), 10000, seed=3).values
    assert 3.8 <= z.var() <= 4.2


def test_simulate_deterministic(ar3):
    a = simulate(ar3, 200, seed=42)
    b = simulate(ar3, 200, seed=42)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.origin == "clean"
    assert not np.array_equal(a.values, simulate(ar3, 200, seed=43).values)


@pytest.mark.parametrize("model", [ArmaModel((1.0,), ()), ArmaModel((0.5,), (1.2,)),
                                   ArmaModel((0.5,), (), 0.0)])
def test_simulate_rejects_invalid_models(model):
    with pytest.raises(ModelError):
        simulate(model, 10, seed=0)


def test_innovations_ar1_direct_formula():
    y = simulate(ArmaModel((0.5,), ()), 50, seed=1).values
    r = innovations(ArmaModel((0.5,), ()), y)
    assert r.origin == "residual"
    np.testing.assert_allclose(r.values[1:], y[1:] - 0.5 * y[:-1], atol=1e-14)
    assert r.values[0] == y[0]


def test_innovations_round_trip_statistics():
    model = ArmaModel((0.5, -0.2), (0.4,), 1.0)
    T = 5000
    r = innovations(model, simulate(model, T, seed=11, burn_in=500)).values
    skip = 10 * max(model.p, model.q)
    r = r[skip:]
    assert abs(r.mean()) < 3 * model.sigma / np.sqrt(T)
    assert abs(r.var() / model.sigma**2 - 1) < 0.10


def test_ao_propagates_into_following_innovations():
    model = ArmaModel((0.5,), ())
    clean = simulate(model, 100, seed=5)
    cs = inject(model, clean, [OutlierSpec("AO", 40, 4.0)])
    diff = innovations(model, cs.observed).values - innovations(model, clean).values
    assert abs(diff[39] - 4.0) < 1e-10
    assert abs(diff[40] + 2.0) < 1e-10
    assert np.all(np.abs(np.delete(diff, [39, 40])) < 1e-10)


def test_innovations_rejects_noninvertible():
    with pytest.raises(ModelError):
        innovations(ArmaModel((), (1.5,)), np.ones(5))


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries([])
    with pytest.raises(ValueError):
        TimeSeries([1.0, np.inf])
    ts = TimeSeries([1, 2, 3])
    assert len(ts) == 3
    with pytest.raises(ValueError):
        ts.values[0] = 5


def test_model_dict_round_trip():
    m = ArmaModel((0.5, 0.2), (0.3,), 1.5)
    assert ArmaModel.from_dict(m.to_dict()) == m


coef = st.floats(-0.45, 0.45)


@settings(max_examples=50, deadline=None)
@given(st.lists(coef, max_size=2), st.lists(coef, max_size=2),
       st.lists(st.floats(-50, 50), min_size=1, max_size=60))
def test_innovations_and_ma_filter_are_inverse(phi, theta, y):
    # |coefficients| < 0.5 with at most two lags keeps both polynomials stable
    model = ArmaModel(tuple(phi), tuple(theta))
    r = innovations(model, y)
    np.testing.assert_allclose(ma_filter(model, r), y, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 50), st.integers(0, 30))
def test_simulate_bit_reproducible(seed, T, burn):
    m = ArmaModel((0.3,), (0.2,), 1.3)
    assert simulate(m, T, seed, burn).values.tobytes() == simulate(m, T, seed, burn).values.tobytes()
