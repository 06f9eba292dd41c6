import itertools

import numpy as np
import pytest

from rmtlab.ensembles import MatrixProfile, make_dist, sample_symmetric
from rmtlab.spectral import (
    eigen_sorted,
    gap_stat,
    interlacing_check,
    kth_smallest_sv,
    restricted_bound_rhs,
    restricted_column_select,
    singular_values,
    spectral_norm_event,
)


def test_eigen_sorted_ascending_and_vectors():
    A = sample_symmetric(MatrixProfile.homogeneous(12, make_dist("gaussian")), 0)
    sp = eigen_sorted(A, vectors=True)
    assert np.all(np.diff(sp.eigenvalues) >= 0)
    V = sp.eigenvectors
    assert np.allclose(A @ V, V * sp.eigenvalues, atol=1e-10)


def test_eigen_sorted_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        eigen_sorted(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        eigen_sorted(np.zeros((2, 3)))


def test_gap_law_of_2x2_sign_matrices():
    # eigenvalue gap of [[a, b], [b, c]] is sqrt((a-c)^2 + 4b^2): 2 if a == c, 2√2 otherwise
    gaps = []
    for a, b, c in itertools.product([-1.0, 1.0], repeat=3):
        gaps.append(gap_stat(eigen_sorted(np.array([[a, b], [b, c]])), 1, 1))
    gaps = np.sort(gaps)
    assert np.allclose(gaps, [2, 2, 2, 2] + [2 * np.sqrt(2)] * 4)


def test_gap_stat_index_bounds():
    sp = eigen_sorted(np.diag([1.0, 2.0, 4.0]))
    assert gap_stat(sp, 1, 2) == 3.0
    assert gap_stat(sp, 2, 1) == 2.0
    for i, k in [(0, 1), (3, 1), (2, 2), (1, 0)]:
        with pytest.raises(IndexError):
            gap_stat(sp, i, k)


def test_kth_smallest_sv():
    M = np.diag([3.0, 1.0, 2.0])
    assert kth_smallest_sv(M, 1) == 1.0
    assert kth_smallest_sv(M, 2) == 2.0
    assert kth_smallest_sv(M, 3) == 3.0
    with pytest.raises(IndexError):
        kth_smallest_sv(M, 4)
    R = np.ones((5, 2))
    assert kth_smallest_sv(R, 1) == pytest.approx(0.0, abs=1e-12)


def test_singular_values_descending():
    s = singular_values(np.random.default_rng(0).standard_normal((6, 4)))
    assert s.shape == (4,) and np.all(np.diff(s) <= 0)


def test_spectral_norm_event_boundary_counts():
    A = np.diag([8.0, 0.0, 0.0, 0.0])  # ‖A‖ = 4√4 exactly
    norm, ev = spectral_norm_event(A)
    assert norm == 8.0 and ev
    assert not spectral_norm_event(np.diag([7.9, 0, 0, 0]))[1]


def test_interlacing_diagonal_and_random():
    assert interlacing_check(np.diag([3.0, -1.0, 2.0, 0.5]))
    A = sample_symmetric(MatrixProfile.homogeneous(25, make_dist("rademacher")), 3)
    assert interlacing_check(A)
    with pytest.raises(ValueError):
        interlacing_check(np.ones((1, 1)))


def test_restricted_bound_hand_computed():
    W = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    # k = 2, d = 3, l = 1: only r = 2, giving sqrt(3·2 / (1·1))
    assert restricted_bound_rhs(W, 1) == pytest.approx(np.sqrt(6.0))
    sel = restricted_column_select(W, 1)
    assert sel.achieved_sl == pytest.approx(1.0)
    assert sel.ratio == pytest.approx(1.0 / np.sqrt(6.0))


def test_exhaustive_beats_greedy():
    rng = np.random.default_rng(4)
    for _ in range(20):
        W = rng.standard_normal((4, 7))
        ex = restricted_column_select(W, 2, "exhaustive")
        gr = restricted_column_select(W, 2, "greedy")
        assert ex.achieved_sl >= gr.achieved_sl - 1e-12
        assert len(set(ex.indices)) == 2


def test_restricted_errors():
    with pytest.raises(ValueError):
        restricted_column_select(np.ones((2, 3)), 1)  # rank deficient
    with pytest.raises(ValueError):
        restricted_column_select(np.eye(3), 3)
    with pytest.raises(ValueError):
        restricted_column_select(np.random.default_rng(0).standard_normal((3, 30)), 2, max_subsets=10)
    with pytest.raises(ValueError):
        restricted_column_select(np.random.default_rng(0).standard_normal((3, 5)), 2, mode="random")
