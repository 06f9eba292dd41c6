"""Sphere decomposition, affine distances, almost orthogonality and integer boxes."""
from __future__ import annotations

from dataclasses import dataclass
from math import floor, ceil, log

import numpy as np
from scipy import linalg


@dataclass(frozen=True)
class DecompParams:
    """Compressibility thresholds δ, ρ and the derived spread window κ₀ < κ₁."""

    delta: float = 0.1
    rho: float = 0.3

    def __post_init__(self):
        if not (0 < self.delta < 1 and 0 < self.rho < 1):
            raise ValueError("delta and rho must lie in (0, 1)")

    @property
    def kappa0(self) -> float:
        return self.rho / 3.0

    @property
    def kappa1(self) -> float:
        return self.delta**-0.5 + self.rho / 6.0


def _unit(x, tol=1e-9):
    x = np.asarray(x, dtype=float)
    nrm = float(np.linalg.norm(x))
    if nrm == 0:
        raise ValueError("zero vector")
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"expected a unit vector (norm {nrm:.12g})")
    return x


def dist_to_sparse(x, delta: float) -> float:
    """Distance from ``x`` to the ⌊δn⌋-sparse vectors.

    Equals the norm of ``x`` with its ⌊δn⌋ largest-magnitude entries removed.
    """
    x = _unit(x)
    s = int(floor(delta * x.size))
    mags = np.sort(np.abs(x))
    kept = mags[: x.size - s]
    return float(np.sqrt(np.sum(kept * kept)))


def is_compressible(x, params: DecompParams = DecompParams()) -> bool:
    return dist_to_sparse(x, params.delta) <= params.rho


def spread_count(x, params: DecompParams = DecompParams()) -> int:
    """Number of i with ρ/(2√n) ≤ |x_i| ≤ δ^{-1/2}/√n."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(x.size)
    a = np.abs(x)
    return int(np.sum((a >= params.rho / (2 * r)) & (a <= params.delta**-0.5 / r)))


def orthonormal_basis(basis, cond_max: float = 1e8) -> np.ndarray:
    """Orthonormal columns spanning the rows of ``basis`` (pivoted QR)."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.shape[0] == 0:
        return np.zeros((B.shape[1], 0))
    Q, R, _ = linalg.qr(B.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d[-1] <= 1e-12 * d[0] or d[0] / d[-1] > cond_max:
        raise ValueError("basis vectors are (numerically) dependent")
    return Q


def dist_to_affine_subspace(a, basis, v=None) -> float:
    """Distance from ``a`` to span(basis) + v.

    Parameters
    ----------
    a : array_like, shape (n,)
    basis : array_like, shape (r, n)
        Rows spanning the linear part.
    v : array_like, optional
        Shift vector (zero by default).
    """
    a = np.asarray(a, dtype=float)
    y = a if v is None else a - np.asarray(v, dtype=float)
    Q = orthonormal_basis(basis)
    r = y - Q @ (Q.T @ y)
    # a second projection pass cleans up cancellation
    r = r - Q @ (Q.T @ r)
    return float(np.linalg.norm(r))


def almost_orthogonal_defect(vectors) -> float:
    """max(|s₁ − 1|, |s_l − 1|) for the matrix of normalized vectors."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero vector in input")
    V0 = (V / norms[:, None]).T
    s = linalg.svd(V0, compute_uv=False)
    s_l = s[V.shape[0] - 1] if s.size >= V.shape[0] else 0.0
    return float(max(abs(s[0] - 1.0), abs(s_l - 1.0)))


def round_to_grid(v, epsilon: float, n: int) -> np.ndarray:
    """Nearest point of (4ε/√n)·ℤⁿ, coordinatewise."""
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    step = 4.0 * epsilon / np.sqrt(n)
    return step * np.rint(np.asarray(v, dtype=float) / step)


# ---------------------------------------------------------------------------
# (N, κ, d)-boxes
# ---------------------------------------------------------------------------

def _size(intervals) -> int:
    return int(sum(b - a + 1 for a, b in intervals if b >= a))


@dataclass(frozen=True)
class BoxSpec:
    """Product of integer sets; each B_i is a tuple of inclusive intervals."""

    N: int
    kappa: float
    d: int
    n: int
    sets: tuple

    def annulus(self) -> tuple:
        lo, hi = self.N, int(floor(self.kappa * self.N))
        return ((-hi, -lo), (lo, hi))

    def sizes(self) -> np.ndarray:
        return np.array([_size(s) for s in self.sets])

    def log_cardinality(self) -> float:
        return float(np.sum(np.log(self.sizes())))

    def contains(self, z) -> bool:
        z = np.asarray(z)
        if z.shape != (self.n,):
            return False
        return all(any(a <= zi <= b for a, b in s) for zi, s in zip(z, self.sets))


def box_validate(box: BoxSpec) -> bool:
    """All defining conditions of an (N, κ, d)-box."""
    if box.N < 2 or box.kappa < 2 or not (0 <= box.d <= box.n) or len(box.sets) != box.n:
        return False
    sizes = box.sizes()
    if np.any(sizes < box.N):
        return False
    ann = box.annulus()
    if any(tuple(box.sets[i]) != ann for i in range(box.d)):
        return False
    return box.log_cardinality() <= box.n * log(box.kappa * box.N) + 1e-12


def box_of(point, N: int, kappa: float, d: int) -> BoxSpec:
    """Canonical box containing an integer point.

    The first ``d`` sets are the annulus [−κN, −N] ∪ [N, κN].  Every other
    coordinate goes to the width-N bucket ``[N⌊z/N⌋, N⌊z/N⌋ + N − 1]``.
    Raises if the point is outside [−κ²N, κ²N]ⁿ, misses the annulus, or
    the resulting product is larger than (κN)ⁿ.
    """
    z = np.asarray(point)
    if not np.issubdtype(z.dtype, np.integer):
        if np.any(z != np.rint(z)):
            raise ValueError("point must have integer coordinates")
        z = np.rint(z).astype(np.int64)
    n = z.size
    N = int(N)
    if N < 2 or kappa < 2 or not (0 <= d <= n):
        raise ValueError("need N >= 2, kappa >= 2, 0 <= d <= n")
    if np.any(np.abs(z) > kappa * kappa * N):
        raise ValueError("point outside the representable range")
    box_tmp = BoxSpec(N, kappa, d, n, ())
    ann = box_tmp.annulus()
    sets = []
    for i, zi in enumerate(z.tolist()):
        if i < d:
            if not any(a <= zi <= b for a, b in ann):
                raise ValueError(f"coordinate {i} misses the annulus")
            sets.append(ann)
        else:
            lo = N * (zi // N)
            sets.append(((lo, lo + N - 1),))
    box = BoxSpec(N, kappa, d, n, tuple(sets))
    if not box_validate(box):
        raise ValueError("box would exceed the (kappa N)^n cardinality bound")
    return box


def sample_lattice_net(n: int, d: int, epsilon: float, params: DecompParams, count: int, seed=0):
    """Integer points z with (4ε/√n)·z in B(0, 2) and spread first d coordinates.

    The head coordinates are uniform on the allowed magnitudes with random
    signs.  The tail is a uniform point of the remaining ball, rounded to
    integers and rejected if rounding leaves the ball.  The result covers
    the net but is not uniform on it.  Returns ``(count, n)``.
    """
    from ._rng import substream

    rng = substream(seed)
    scale = np.sqrt(n) / (4.0 * epsilon)
    lo = int(ceil(params.kappa0 * scale / np.sqrt(n) - 1e-9))
    hi = int(floor(params.kappa1 * scale / np.sqrt(n) + 1e-9))
    if hi < lo:
        raise ValueError("no integer magnitudes in the spread window; decrease epsilon")
    rad2 = (2.0 * scale) ** 2
    out = []
    m = n - d
    while len(out) < count:
        head = rng.integers(lo, hi + 1, size=d) * rng.choice([-1, 1], size=d)
        rem = rad2 - float(np.sum(head.astype(float) ** 2))
        if rem < 0:
            continue
        if m:
            g = rng.standard_normal(m)
            r = np.sqrt(rem) * rng.random() ** (1.0 / m)
            tail = np.rint(r * g / np.linalg.norm(g)).astype(np.int64)
        else:
            tail = np.zeros(0, dtype=np.int64)
        z = np.concatenate([head, tail])
        if np.sum(z.astype(float) ** 2) <= rad2:
            out.append(z)
    return np.array(out)
