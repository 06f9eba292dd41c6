import numpy as np
import pytest
from scipy.optimize import brentq

from rmtlab.arithmetic import (
    LcdParams,
    _gL_from_norms,
    direction_net,
    lcd_holds,
    level_set_containment_check,
    level_set_gaussian_measure,
    log_plus,
    rd_matrix,
    rlogd_matrix,
    rlogd_subspace,
    rlogd_vector,
    threshold_gL,
    torus_norm,
    xi_norm,
    xi_norm_mc,
    xi_sq_terms,
    zeroed_out_norms,
)
from rmtlab._rng import substream
from rmtlab.ensembles import (MatrixProfile, ZeroedOutSpec, build_zeroed_out, make_dist, parse_dist,
                               sample_h1)

RAD = make_dist("rademacher")
GAU = make_dist("gaussian")
UNI = make_dist("uniform-symmetric")


def test_torus_norm_basic():
    assert torus_norm([0.3, 1.9]) == pytest.approx(np.sqrt(0.09 + 0.01))
    assert torus_norm([5.0, -2.0]) == 0.0
    assert torus_norm([0.5]) == 0.5


def test_log_plus():
    assert np.allclose(log_plus([0.0, 0.5, 1.0, np.e]), [0, 0, 0, 1])


# ---- ξ-norm -------------------------------------------------------------------

def test_xi_norm_rademacher_by_hand():
    # ξ̄ ∈ {−2, 0, 2} w.p. ¼, ½, ¼; f(±0.5) = 0.25, so E f = 0.125
    assert xi_norm([0.25], RAD) == pytest.approx(np.sqrt(0.125))
    # 2a integer → all atoms on the lattice
    assert xi_norm([0.5, 1.0, 1.5], RAD) == pytest.approx(0.0, abs=1e-15)


def test_xi_norm_small_scale_is_quadratic():
    # |aξ̄| < 1/2 surely for bounded laws with small a, so E f = a² E ξ̄² = 2a²
    a = 0.05
    assert xi_sq_terms(a, UNI) == pytest.approx(2 * a * a, rel=1e-12)
    assert xi_sq_terms(a, RAD) == pytest.approx(2 * a * a, rel=1e-12)


def test_xi_norm_gaussian_large_scale_tends_to_uniform_value():
    assert xi_sq_terms(5.0, GAU) == pytest.approx(1 / 12, abs=1e-12)


@pytest.mark.parametrize("law", ["gaussian", "uniform-symmetric", "sparse:gaussian:0.3",
                                 "sparse:uniform-symmetric:0.6"])
@pytest.mark.parametrize("a", [1e-3, 0.07, 0.2, 0.3, 0.45, 0.8, 1.3, 2.9])
def test_closed_forms_match_piecewise_quadrature(law, a):
    d = parse_dist(law)
    assert xi_norm([a], d) == pytest.approx(xi_norm([a], d, method="quadrature"), abs=1e-10)


@pytest.mark.parametrize("law", ["rademacher", "gaussian", "uniform-symmetric", "sparse:rademacher:0.25"])
def test_exact_matches_monte_carlo(law):
    d = parse_dist(law)
    x = np.array([0.13, 0.41, 0.77])
    val, se = xi_norm_mc(x, d, trials=200_000, seed=2)
    assert abs(val - xi_norm(x, d)) < 5 * se + 1e-12


def test_xi_norm_mixed_laws_and_batches():
    x = np.array([[0.25, 0.3], [0.5, 0.1]])
    out = xi_norm(x, [RAD, GAU])
    ref0 = np.sqrt(xi_sq_terms(0.25, RAD) + xi_sq_terms(0.3, GAU))
    assert out.shape == (2,) and out[0] == pytest.approx(ref0)
    with pytest.raises(ValueError):
        xi_norm(x, [RAD])
    with pytest.raises(ValueError):
        xi_norm([0.1], RAD, method="simpson")
    with pytest.raises(ValueError):
        xi_norm_mc([0.1], RAD, trials=10)


# ---- LCD scans ----------------------------------------------------------------

def test_rlogd_vector_matches_root():
    p = LcdParams(L=0.1, alpha=0.5)
    res = rlogd_vector(np.array([1.0]), p, RAD)
    # on (1/4, 1/2) the defining inequality is √½(1 − 2θ) < 0.1 √ln(5θ)
    root = brentq(lambda t: np.sqrt(0.5) * (1 - 2 * t) - 0.1 * np.sqrt(np.log(5 * t)), 0.25, 0.5)
    assert res.lo <= root <= res.hi
    assert res.hi - res.lo <= 1e-6 * res.hi
    assert lcd_holds(res.witness * np.array([1.0]), res.hi, 0.1, 0.5, RAD)


def test_rlogd_vector_none_below_cap():
    res = rlogd_vector(np.array([1.0]), LcdParams(L=0.1, alpha=0.5, theta_max=0.3), RAD)
    assert not res.found and res.hi == np.inf


def test_rlogd_vector_gate_closed_below_threshold():
    # αθ‖v‖ ≤ L keeps the right side at zero, so no witness below L/(α‖v‖)
    res = rlogd_vector(np.array([0.6, 0.8]), LcdParams(L=1.0, alpha=0.5, theta_max=1.9), RAD)
    assert not res.found


def test_rlogd_scale_covariance():
    v = np.array([0.3, 0.5, 0.7])
    p = LcdParams(L=0.3, alpha=0.5)
    a = rlogd_vector(v, p, GAU).hi
    b = 3.7 * rlogd_vector(3.7 * v, p, GAU).hi
    assert b == pytest.approx(a, rel=p.ratio - 1)


def test_direction_nets():
    assert direction_net(1, 0.1).shape == (1, 1)
    U2 = direction_net(2, 0.01)
    U3 = direction_net(3, 0.1)
    for U in (U2, U3):
        assert np.allclose(np.linalg.norm(U, axis=1), 1.0)
    assert np.all(U3[:, 2] > 0)
    with pytest.raises(ValueError):
        direction_net(4, 0.1)


def test_subspace_witness_lies_in_span():
    B = np.array([[1.0, 0, 0, 0], [0, 1.0, 1.0, 0]])
    res = rlogd_subspace(B, LcdParams(L=0.3, alpha=0.5, mode="subspace", angular_res=0.02), RAD)
    assert res.found
    w = res.witness
    assert np.linalg.norm(w) == pytest.approx(res.hi)
    Q, _ = np.linalg.qr(B.T)
    assert np.allclose(Q @ (Q.T @ w), w)
    with pytest.raises(ValueError):
        rlogd_subspace([[1.0, 0], [2.0, 0]], LcdParams(L=0.3, alpha=0.5), RAD)


def test_rlogd_matrix_one_row_equals_vector_scan():
    v = np.array([0.6, 0.8])
    p = LcdParams(L=0.2, alpha=0.5)
    assert rlogd_matrix(v[None, :], p, RAD).hi == pytest.approx(rlogd_vector(v, p, RAD).hi)


def test_rlogd_matrix_many_rows_is_heuristic():
    V = np.random.default_rng(0).standard_normal((5, 8))
    res = rlogd_matrix(V, LcdParams(L=0.5, alpha=0.5, theta_max=30, n_starts=16), GAU)
    assert res.heuristic and res.lo == 0.0


@pytest.mark.parametrize("law", ["rademacher", "gaussian"])
def test_rd_sandwich_on_almost_orthogonal_rows(law):
    V = np.array([[1.0, 0.1, 0.0, 0.3], [0.0, 1.0, 0.2, -0.1]]) / 2
    p = LcdParams(L=0.5, alpha=0.1, theta_max=200, angular_res=0.02)
    rep = rd_matrix(V, p, parse_dist(law), sandwich=True)
    s = rep.sandwich
    assert s["applies"]
    tol = p.ratio
    assert s["rd_4alpha"] <= s["rlogd"] * tol
    assert s["rlogd"] <= s["rd_alpha_over_4"] * tol


def test_rd_sandwich_not_applicable():
    rep = rd_matrix(np.array([[1.0, 0.0], [1.0, 0.2]]), LcdParams(L=0.5, alpha=0.3, theta_max=20), RAD,
                    sandwich=True)
    assert rep.sandwich == {"defect": pytest.approx(rep.sandwich["defect"]), "applies": False}


def test_lcd_params_validation():
    with pytest.raises(ValueError):
        LcdParams(L=0, alpha=0.5)
    with pytest.raises(ValueError):
        LcdParams(L=1, alpha=1.0)
    with pytest.raises(ValueError):
        LcdParams(L=1, alpha=0.5, theta_max=np.inf)
    with pytest.raises(ValueError):
        LcdParams(L=1, alpha=0.5, ratio=1.0)


# ---- level sets and threshold ------------------------------------------------

def test_level_set_containment_has_no_failures():
    W = np.random.default_rng(1).standard_normal((5, 2))
    pairs, fails = level_set_containment_check(W, 0.4, RAD, pairs=2000, seed=1)
    assert pairs == 2000 and fails == 0


def test_level_set_measure_monotone():
    W = np.random.default_rng(2).standard_normal((4, 2))
    a, _ = level_set_gaussian_measure(W, 0.1, GAU, trials=4000, seed=0)
    b, _ = level_set_gaussian_measure(W, 0.5, GAU, trials=4000, seed=0)
    assert a <= b
    with pytest.raises(ValueError):
        level_set_gaussian_measure(W, 0.1, GAU, trials=10)


def test_threshold_from_norms_hand_computed():
    # norms/√n = {0.1, 0.2}, m = 1, L = 1: F ≥ 4t holds up to t = 1/4 on [0.2, ∞)
    n = 4
    norms = np.array([0.1, 0.2]) * np.sqrt(n)
    assert _gL_from_norms(norms, n, 1, 1.0) == pytest.approx(0.25)
    # with L = 4 the same reasoning caps at 1/16 < 0.1, so only F = 0 remains
    assert _gL_from_norms(norms, n, 1, 4.0) == pytest.approx(0.0)


def test_threshold_bracket_and_limits():
    n, k, d = 12, 1, 3
    spec = ZeroedOutSpec(n, k, d, nu=0.5, base_profile=MatrixProfile.homogeneous(n, RAD))
    v = np.ones(n) / np.sqrt(n)
    res = threshold_gL(v, n, k, 1.0, spec, trials=3000, seed=0)
    assert res.lo <= res.estimate <= res.hi
    with pytest.raises(ValueError):
        big = ZeroedOutSpec(30, 1, 3)
        threshold_gL(np.ones(30) / np.sqrt(30), 30, 1, 1.0, big)


def test_zeroed_out_norms_match_explicit_matrix():
    spec = ZeroedOutSpec(9, 1, 3, nu=0.7)
    v = np.random.default_rng(0).standard_normal(9)
    fast = zeroed_out_norms(v, spec, 1, seed=4)[0]
    # same stream: one H₁ draw keyed by seed 4
    H1 = sample_h1(spec, substream(4), 1)[0]
    M = np.zeros((spec.m, 9))
    M[3:, :3] = H1
    M[:3, 3:spec.m] = H1.T
    assert fast == pytest.approx(np.linalg.norm(M @ v))
    assert build_zeroed_out(spec, 4).shape == M.shape
