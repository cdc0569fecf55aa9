import numpy as np
import pytest

from cellts.estimators import (
    EstimationError,
    LocationScatter,
    complete_cases,
    consistency_constant,
    embed,
    gse,
    m_scale,
    s_estimator,
    scatter_to_ar,
    tukey_rho,
    tukey_weight,
)
from cellts.estimators.embedding import drop_empty_rows

from conftest import ar_autocovariances, reference_experiment

# c with E[rho_c(||Z||)] = 0.5 from the closed-form chi-square moments
# E[X^k 1{X <= c^2}] = p(p+2)...(p+2k-2) F_{p+2k}(c^2), solved with brentq
C_ORACLE = {1: 1.5476449809282256, 2: 2.6608033929473494, 3: 3.4528816505237088, 4: 4.096562166146175}


def gaussian_sample(n, seed):
    rng = np.random.default_rng(seed)
    mu = np.array([1.0, -2.0, 0.5, 3.0])
    A = np.array([[1.0, 0.0, 0.0, 0.0], [0.5, 1.0, 0.0, 0.0],
                  [0.2, -0.3, 0.8, 0.0], [0.0, 0.4, 0.1, 1.2]])
    Sig = A @ A.T
    return rng.multivariate_normal(mu, Sig, size=n), mu, Sig


def opnorm_rel(S, T):
    return np.linalg.norm(S - T, 2) / np.linalg.norm(T, 2)


# embedding ------------------------------------------------------------------

def test_embed_hand_example():
    M = embed([1.0, 2.0, 3.0, 4.0], 1)
    np.testing.assert_array_equal(M.rows, [[2, 1], [3, 2], [4, 3]])
    np.testing.assert_array_equal(M.times, [2, 3, 4])
    assert not M.missing_mask.any()


def test_embed_hankel_structure():
    M = embed(np.arange(20.0), 3)
    np.testing.assert_array_equal(M.rows[1:, 1:], M.rows[:-1, :-1])


def test_one_flag_masks_p_plus_one_cells():
    flags = np.zeros(30, bool)
    flags[10] = True
    M = embed(np.arange(30.0), 3, flags)
    assert M.missing_mask.sum() == 4
    rows = np.flatnonzero(M.missing_mask.any(axis=1))
    np.testing.assert_array_equal(rows, [7, 8, 9, 10])
    np.testing.assert_array_equal(M.rows[M.missing_mask], np.full(4, 10.0))


@pytest.mark.parametrize("pos, expected", [(0, 1), (1, 2), (2, 3), (5, 4), (29, 1), (27, 3)])
def test_flag_near_edges_masks_occupied_cells(pos, expected):
    flags = np.zeros(30, bool)
    flags[pos] = True
    assert embed(np.arange(30.0), 3, flags).missing_mask.sum() == expected


def test_embedding_contaminated_row_fraction():
    cs = reference_experiment(0)
    M = embed(cs.observed, 3, cs.cell_truth)
    assert abs(M.row_contaminated().mean() - 4 / 7) <= 0.01
    C = complete_cases(M)
    assert abs(C.n / M.n - 3 / 7) <= 0.01


def test_complete_cases_identity_without_flags():
    M = embed(np.arange(10.0), 2)
    C = complete_cases(M)
    np.testing.assert_array_equal(C.rows, M.rows)


def test_complete_cases_all_flagged():
    with pytest.raises(EstimationError):
        complete_cases(embed(np.arange(10.0), 2, np.ones(10, bool)))


def test_drop_empty_rows():
    flags = np.zeros(12, bool)
    flags[3:7] = True
    M = embed(np.arange(12.0), 2, flags)
    assert drop_empty_rows(M).n == M.n - 2


# tukey / consistency -------------------------------------------------------

def test_tukey_rho_values():
    c = 2.0
    assert tukey_rho(0.0, c) == 0.0
    assert tukey_rho(c, c) == 1.0
    assert tukey_rho(2 * c, c) == 1.0
    assert tukey_rho(c / 2, c) == pytest.approx(37 / 64)
    assert tukey_rho(-0.7, c) == tukey_rho(0.7, c)


def test_tukey_weight_is_psi_over_u():
    c = 1.5
    u = np.linspace(0.01, 1.49, 50)
    h = 1e-6
    psi = (tukey_rho(u + h, c) - tukey_rho(u - h, c)) / (2 * h)
    np.testing.assert_allclose(tukey_weight(u, c), psi / u, rtol=1e-6)
    assert np.all(tukey_weight([1.5, 2.0, -3.0], c) == 0)


def test_tukey_rejects_nonpositive_c():
    with pytest.raises(ValueError):
        tukey_rho(1.0, 0.0)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_consistency_constant_matches_oracle(dim):
    assert consistency_constant(dim, 0.5) == pytest.approx(C_ORACLE[dim], abs=1e-8)


def test_consistency_constant_dim1_frozen():
    assert consistency_constant(1, 0.5) == pytest.approx(1.548, abs=5e-4)


def test_consistency_constant_monotone_in_b():
    bs = [0.5, 0.3, 0.1, 0.05, 0.01]
    cs = [consistency_constant(2, b) for b in bs]
    assert all(a < b for a, b in zip(cs, cs[1:]))


def test_consistency_constant_dim4_monte_carlo():
    c = consistency_constant(4, 0.5)
    r = np.linalg.norm(np.random.default_rng(2024).normal(size=(10**6, 4)), axis=1)
    assert abs(np.mean(tukey_rho(r, c)) - 0.5) < 0.005


def test_m_scale_solves_equation():
    d = np.abs(np.random.default_rng(0).normal(size=500))
    s = m_scale(d, 1.5, 0.5)
    assert np.mean(tukey_rho(d / s, 1.5)) == pytest.approx(0.5, abs=1e-10)


# S and GSE ----------------------------------------------------------------

def test_s_estimator_gaussian_consistency():
    X, mu, Sig = gaussian_sample(5000, 0)
    est = s_estimator(X)
    assert np.all(np.abs(est.location - mu) <= 0.1)
    assert opnorm_rel(est.scatter, Sig) <= 0.10


def test_s_estimator_affine_equivariance():
    X, _, _ = gaussian_sample(2000, 1)
    A = np.array([[2.0, 0.3, 0.0, -1.0], [0.0, 1.0, 0.5, 0.0],
                  [0.1, 0.0, 3.0, 0.2], [0.0, -0.4, 0.0, 0.7]])
    v = np.array([10.0, -5.0, 3.0, 0.0])
    e1 = s_estimator(X)
    e2 = s_estimator(X @ A.T + v)
    np.testing.assert_allclose(e2.location, A @ e1.location + v, atol=1e-6)
    S = A @ e1.scatter @ A.T
    assert np.max(np.abs(e2.scatter - S)) / np.max(np.abs(S)) < 1e-6


def test_s_estimator_resists_point_mass():
    X, _, _ = gaussian_sample(1000, 2)
    clean = s_estimator(X).location
    Y = X.copy()
    Y[:200] = [50.0, 50.0, -50.0, 50.0]
    assert np.all(np.abs(s_estimator(Y).location - clean) <= 1.0)


def test_s_estimator_input_checks():
    X, _, _ = gaussian_sample(6, 3)
    with pytest.raises(EstimationError):
        s_estimator(X)
    Y, _, _ = gaussian_sample(100, 3)
    Y[0, 0] = np.nan
    with pytest.raises(ValueError):
        s_estimator(Y)


def test_gse_reduces_to_s_estimator():
    X, _, _ = gaussian_sample(1500, 4)
    e = s_estimator(X)
    g = gse(X)
    np.testing.assert_allclose(g.location, e.location, atol=1e-6)
    np.testing.assert_allclose(g.scatter, e.scatter, atol=1e-6)
    assert g.scale == pytest.approx(e.scale, abs=1e-6)


def test_gse_missing_completely_at_random():
    X, mu, Sig = gaussian_sample(5000, 5)
    M = X.copy()
    M[np.random.default_rng(6).random(X.shape) < 0.1] = np.nan
    M[np.isnan(M).all(axis=1), 0] = X[np.isnan(M).all(axis=1), 0]
    g = gse(M)
    assert np.all(np.abs(g.location - mu) <= 0.15)
    assert opnorm_rel(g.scatter, Sig) <= 0.15
    assert g.diagnostics["masked_cells"] == int(np.isnan(M).sum())


def test_gse_rejects_unobserved_pairs():
    X, _, _ = gaussian_sample(200, 7)
    X[:100, 0] = np.nan
    X[100:, 1] = np.nan
    with pytest.raises(EstimationError, match="jointly observed"):
        gse(X)


def test_gse_rejects_empty_rows():
    X, _, _ = gaussian_sample(200, 7)
    X[5] = np.nan
    with pytest.raises(ValueError):
        gse(X)


def test_location_scatter_invariants():
    with pytest.raises(ValueError):
        LocationScatter(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0)
    with pytest.raises(ValueError):
        LocationScatter(np.zeros(2), -np.eye(2), 1.0)


# scatter_to_ar -------------------------------------------------------------

def test_scatter_to_ar_true_autocovariance(ar3):
    g = ar_autocovariances(ar3.phi, 1.0, 3)
    Gamma = np.array([[g[abs(i - j)] for j in range(4)] for i in range(4)])
    fit = scatter_to_ar(Gamma, 3)
    np.testing.assert_allclose(fit.phi, ar3.phi, atol=1e-10)
    assert fit.sigma == pytest.approx(1.0, abs=1e-10)


def test_scatter_to_ar_identity():
    fit = scatter_to_ar(np.eye(4), 3)
    np.testing.assert_allclose(fit.phi, 0, atol=0)
    assert fit.sigma == 1.0


@pytest.mark.parametrize("a", [0.25, 3.0, 100.0])
def test_scatter_to_ar_homogeneity(ar3, a):
    g = ar_autocovariances(ar3.phi, 1.0, 3)
    Gamma = np.array([[g[abs(i - j)] for j in range(4)] for i in range(4)])
    f1, f2 = scatter_to_ar(Gamma, 3), scatter_to_ar(a * Gamma, 3)
    np.testing.assert_allclose(f2.phi, f1.phi, atol=1e-12)
    assert f2.sigma == pytest.approx(np.sqrt(a) * f1.sigma)


def test_scatter_to_ar_singular():
    S = np.ones((3, 3))
    with pytest.raises(EstimationError):
        scatter_to_ar(S, 2)
