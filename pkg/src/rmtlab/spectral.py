"""Eigenvalues, singular values, gaps and restricted column selection."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np
from scipy import linalg


@dataclass
class Spectrum:
    """Ascending eigenvalues λ₁ ≤ … ≤ λ_n (1-based in the API)."""

    eigenvalues: np.ndarray
    source_dim: int
    eigenvectors: Optional[np.ndarray] = None


def _check_symmetric(A, tol=1e-12):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return A


def eigen_sorted(A, vectors: bool = False) -> Spectrum:
    """Symmetric eigendecomposition with ascending eigenvalues (LAPACK ``evd``)."""
    A = _check_symmetric(A)
    if vectors:
        w, V = linalg.eigh(A, driver="evd")
        return Spectrum(w, A.shape[0], V)
    w = linalg.eigh(A, eigvals_only=True, driver="evd")
    return Spectrum(w, A.shape[0])


def gap_stat(spec: Spectrum, i: int, k: int) -> float:
    """λ_{i+k} − λ_i with 1-based ``i``; requires 1 ≤ i ≤ n − k."""
    n = spec.source_dim
    if k < 1 or not (1 <= i <= n - k):
        raise IndexError(f"need 1 <= i <= n-k (n={n}, i={i}, k={k})")
    lam = spec.eigenvalues
    return float(max(lam[i + k - 1] - lam[i - 1], 0.0))


def singular_values(M) -> np.ndarray:
    """Descending singular values."""
    return linalg.svd(np.asarray(M, dtype=float), compute_uv=False)


def kth_smallest_sv(M, k: int) -> float:
    """σ_{p−k+1} with σ₁ ≥ … ≥ σ_p and p = min(rows, cols)."""
    M = np.asarray(M, dtype=float)
    p = min(M.shape)
    if not (1 <= k <= p):
        raise IndexError(f"k must lie in [1, {p}]")
    return float(singular_values(M)[p - k])


def spectral_norm_event(A, factor: float = 4.0):
    """Operator norm and the indicator ‖A‖ ≥ factor·√n (boundary counts)."""
    A = np.asarray(A, dtype=float)
    norm = float(singular_values(A)[0]) if A.size else 0.0
    return norm, bool(norm >= factor * np.sqrt(A.shape[0]))


def interlacing_check(A, tol: float = 1e-9) -> bool:
    """Leading principal minor eigenvalues interlace those of ``A``."""
    A = _check_symmetric(A)
    n = A.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    lam = eigen_sorted(A).eigenvalues
    mu = eigen_sorted(A[:-1, :-1]).eigenvalues
    slack = tol * max(float(np.max(np.abs(lam))), 1e-300)
    return bool(np.all(mu >= lam[:-1] - slack) and np.all(mu <= lam[1:] + slack))


# ---------------------------------------------------------------------------
# restricted invertibility
# ---------------------------------------------------------------------------

@dataclass
class ColumnSelection:
    indices: tuple
    achieved_sl: float
    bound_rhs: float
    mode: str

    @property
    def ratio(self) -> float:
        """achieved_sl⁻¹ / bound_rhs; small means the bound is met with room."""
        return (1.0 / self.achieved_sl) / self.bound_rhs


def _sl(W, cols, l):
    s = singular_values(W[:, list(cols)])
    return float(s[l - 1]) if s.size >= l else 0.0


def restricted_bound_rhs(W, l: int) -> float:
    """min over r ∈ {l+1..k} of √(d r / ((r − l) Σ_{i=r}^{k} s_i(W)²))."""
    W = np.asarray(W, dtype=float)
    k, d = W.shape
    s = singular_values(W)
    tail = np.cumsum((s**2)[::-1])[::-1]  # tail[r-1] = Σ_{i=r}^k s_i²
    vals = [np.sqrt(d * r / ((r - l) * tail[r - 1])) for r in range(l + 1, k + 1)]
    return float(min(vals))


def restricted_column_select(W, l: int, mode: str = "exhaustive", max_subsets: int = 10**6) -> ColumnSelection:
    """Choose ``l`` columns of the k×d matrix ``W`` with large s_l.

    ``exhaustive`` maximizes s_l over all C(d, l) subsets; ``greedy`` starts
    from all columns and repeatedly drops the column whose removal keeps
    s_l largest.
    """
    W = np.asarray(W, dtype=float)
    k, d = W.shape
    if not (1 <= l <= k - 1 <= d - 1):
        raise ValueError("need 1 <= l <= k-1 <= d-1")
    s = singular_values(W)
    if s[-1] <= 1e-12 * s[0]:
        raise ValueError("W is rank deficient")
    rhs = restricted_bound_rhs(W, l)
    if mode == "exhaustive":
        if comb(d, l) > max_subsets:
            raise ValueError("too many subsets for exhaustive search")
        best, best_val = None, -1.0
        for cols in combinations(range(d), l):
            v = _sl(W, cols, l)
            if v > best_val:
                best, best_val = cols, v
    elif mode == "greedy":
        cols = list(range(d))
        while len(cols) > l:
            scores = [_sl(W, cols[:j] + cols[j + 1:], l) for j in range(len(cols))]
            cols.pop(int(np.argmax(scores)))
        best, best_val = tuple(cols), _sl(W, cols, l)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not best_val > 0:
        raise ValueError("no subset with positive s_l")
    return ColumnSelection(tuple(int(c) for c in best), best_val, rhs, mode)
