import numpy as np
import pytest
from scipy.stats import chi

from rmtlab.config import ExperimentConfig
from rmtlab.ensembles import make_dist
from rmtlab.experiments import (
    TailCurve,
    box_rlogd_experiment,
    chi_oracle,
    decoupling_check,
    deloc_min_norm,
    distance_to_column_span,
    fit_exponent,
    interlace_gap_chain_check,
    predicted_exponent,
    run_tail_experiment,
    sample_statistic,
    statistic_scale,
)

RAD = make_dist("rademacher")


def _cfg(**kw):
    base = dict(experiment="gap-tail", seed=0, n=10, trials=400, chunk=64)
    base.update(kw)
    return ExperimentConfig(**base)


# ---- statistics ------------------------------------------------------------------

def test_deloc_of_basis_vector_is_zero():
    e1 = np.zeros(20)
    e1[0] = 1.0
    assert deloc_min_norm(e1, 0.1)[0] == 0.0
    flat = np.ones(20) / np.sqrt(20)
    # ⌈0.1·20⌉ = 2 coordinates of size 1/√20
    assert deloc_min_norm(flat, 0.1)[0] == pytest.approx(np.sqrt(2 / 20))


def test_distance_to_span_hand_case():
    A = np.eye(3)
    a = np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 4.0]])
    # span of e1, e2 when k = 1
    assert np.allclose(distance_to_column_span(A, 1, a), [3.0, 4.0])
    assert np.allclose(distance_to_column_span(A, 2, a), [np.sqrt(13), 4.0])


def test_scales_and_predictions():
    assert statistic_scale(_cfg(n=16)) == 0.25
    assert predicted_exponent(_cfg(k=3)) == 6.0
    assert predicted_exponent(_cfg(experiment="sv-tail")) is None
    rect = _cfg(experiment="rect-sv", n=5, N=9, gamma=0.5)
    assert statistic_scale(rect) == pytest.approx(3 - 2)
    assert predicted_exponent(rect) == pytest.approx(0.5 * 5 - 1)
    assert statistic_scale(_cfg(experiment="distance", k=4)) == 2.0


def test_gap_law_of_2x2_sign_matrices():
    # normalized gaps are 2√2 or 4 with probability ½ each
    cfg = _cfg(n=2, i=1, ensemble_dist="rademacher", trials=4000, grid_points=(2.8, 2.9, 3.9, 4.1))
    curve = run_tail_experiment(cfg)
    assert curve.successes[0] == 0 and curve.successes[-1] == curve.trials
    assert curve.ci_lo[1] <= 0.5 <= curve.ci_hi[1]
    assert curve.probs[1] == curve.probs[2]
    raw = sample_statistic(cfg)
    assert np.allclose(np.unique(np.round(raw, 12)), [2.0, 2 * np.sqrt(2)])


def test_shared_curve_is_monotone_and_floored():
    curve = run_tail_experiment(_cfg(experiment="sv-tail"))
    assert np.all(np.diff(curve.successes) >= 0)
    assert curve.floor == 10 / 400
    with pytest.raises(ValueError):
        run_tail_experiment(_cfg(trials=15))


def test_thread_count_does_not_change_results():
    for exp, extra in [("gap-tail", {}), ("distance", {"k": 2, "vector_per_matrix": 3}),
                       ("deloc", {}), ("rect-sv", {"N": 14})]:
        cfg = _cfg(experiment=exp, trials=300, chunk=32, **extra)
        a = sample_statistic(cfg, threads=1)
        b = sample_statistic(cfg, threads=4)
        assert np.array_equal(a, b)


def test_chunk_boundaries_follow_seed_not_threads():
    a = sample_statistic(_cfg(seed=1))
    b = sample_statistic(_cfg(seed=2))
    assert not np.array_equal(a, b)


def test_distance_trials_count_pairs():
    cfg = _cfg(experiment="distance", k=2, trials=100, vector_per_matrix=5)
    curve = run_tail_experiment(cfg)
    assert curve.trials == 500


def test_pointwise_distance_covers_chi_law():
    k = 3
    eps = np.geomspace(0.2, 1.2, 20)
    cfg = _cfg(experiment="distance", n=12, k=k, trials=400, vector_per_matrix=100, grid_points=tuple(eps))
    curve = run_tail_experiment(cfg, pointwise=True)
    assert curve.trials == 2000
    ref = chi_oracle(curve, k)
    covered = np.sum((curve.ci_lo <= ref) & (ref <= curve.ci_hi))
    assert covered >= 16


# ---- exponent fit ------------------------------------------------------------------

def _exact_curve(eps, probs, T=10**9):
    succ = np.rint(np.asarray(probs) * T)
    return TailCurve.from_counts("synthetic", eps, succ, T, 1.0)


def test_fit_exact_power_law():
    eps = np.geomspace(0.01, 0.5, 12)
    fit = fit_exponent(_exact_curve(eps, eps**2))
    assert fit.slope == pytest.approx(2.0, abs=0.01)
    assert fit.r_squared > 0.9999


def test_fit_ignores_saturated_points():
    eps = np.geomspace(0.01, 1.0, 15)
    fit = fit_exponent(_exact_curve(eps, np.minimum(1.0, 3 * eps)))
    assert fit.slope == pytest.approx(1.0, abs=0.01)
    assert fit.fit_window[1] <= 0.5 / 3 + 1e-12


def test_chi4_small_window_slope():
    eps = np.geomspace(0.02, 0.2, 10)
    fit = fit_exponent(_exact_curve(eps, chi.cdf(2 * eps, 4), T=10**12))
    assert abs(fit.slope - 4) <= 0.3


def test_fit_needs_points():
    eps = np.array([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        fit_exponent(_exact_curve(eps, eps))


def test_curve_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        TailCurve.from_counts("x", [0.2, 0.1], [1, 2], 10, 1.0)


# ---- decoupling --------------------------------------------------------------------

def test_decoupling_zero_vector_is_trivial():
    rep = decoupling_check(8, 1, 3, RAD, np.zeros(8), trials=2000, seed=0, radius=0.5)
    assert rep["lhs"] == 1.0 and rep["rhs"] == 1.0 and rep["ok"]


def test_decoupling_large_radius():
    v = np.ones(10) / np.sqrt(10)
    rep = decoupling_check(10, 2, 3, RAD, v, trials=2000, seed=(4, 5), radius=1e3)
    assert rep["lhs"] == rep["rhs"] == 1.0


def test_decoupling_limits():
    with pytest.raises(ValueError):
        decoupling_check(30, 1, 3, RAD, np.ones(30), trials=100)
    with pytest.raises(ValueError):
        decoupling_check(8, 1, 3, RAD, np.ones(7), trials=100)
    with pytest.raises(ValueError):
        decoupling_check(8, 1, 3, RAD, np.ones(8) * 10, trials=100, radius=1e-3)


# ---- box experiment ----------------------------------------------------------------

def test_box_fraction_monotone_in_K():
    rep = box_rlogd_experiment(3, 2, 2, RAD, [0.01, 5.0, 50.0, 500.0], trials=60, seed=0)
    fr = rep["fraction"]
    assert fr[0] == 0.0
    assert np.all(np.diff(fr) >= 0)


def test_box_exhaustive_inside_mc_interval():
    ex = box_rlogd_experiment(2, 2, 2, RAD, 30.0, exhaustive=True)
    mc = box_rlogd_experiment(2, 2, 2, RAD, 30.0, trials=400, seed=1)
    assert ex["points"] == 36  # annulus {±2, ±3, ±4}
    lo, hi = mc["ci"]
    assert lo - 0.05 <= ex["fraction"] <= hi + 0.05


def test_box_errors_and_by_d():
    with pytest.raises(ValueError):
        box_rlogd_experiment(2, 2, 2, RAD, 0.0)
    with pytest.raises(ValueError):
        box_rlogd_experiment(40, 2, 8, RAD, 1.0, exhaustive=True)
    rep = box_rlogd_experiment(2, 2, [1, 2], RAD, 30.0, trials=50)
    assert len(rep["by_d"]) == 2


# ---- interlacing chain ---------------------------------------------------------------

def test_chain_on_diagonal_matrix():
    A = np.diag(np.arange(6, dtype=float))
    rep = interlace_gap_chain_check(6, 1, matrices=[A])
    assert rep["trials"] == 1 and rep["ok"]


def test_chain_on_gaussian_matrices():
    rep = interlace_gap_chain_check(8, 2, trials=400, seed=3, eps=2.0)
    assert rep["ok"]
    assert rep["tested"] + rep["hypothesis_skip"] == 400
    assert rep["tested"] > 0


def test_chain_index_errors():
    with pytest.raises(ValueError):
        interlace_gap_chain_check(3, 2, trials=1)
    with pytest.raises(ValueError):
        interlace_gap_chain_check(8, 2, trials=1, i=7)
