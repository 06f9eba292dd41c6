"""Scalar subgaussian laws, inhomogeneous symmetric ensembles and sparse vectors.

All samplers draw canonical open uniforms in a fixed order and push them
through an inverse CDF, so a sample is a pure function of ``(spec, seed)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize, special

from ._rng import SeedLike, open_uniform, substream

KINDS = ("rademacher", "gaussian", "uniform-symmetric", "discrete", "sparse")
SQRT3 = float(np.sqrt(3.0))
PSI2_RADEMACHER = float(1.0 / np.sqrt(np.log(2.0)))
PSI2_GAUSSIAN = float(np.sqrt(8.0 / 3.0))


def _uniform_mgf_sq(t: float) -> float:
    # E exp(xi^2/t^2) for xi uniform on [-sqrt3, sqrt3]
    a = SQRT3 / t
    return float(np.sqrt(np.pi) * special.erfi(a) / (2.0 * a))


def _psi2_uniform() -> float:
    return float(optimize.brentq(lambda t: _uniform_mgf_sq(t) - 2.0, 0.5, 10.0, xtol=1e-14))


PSI2_UNIFORM = _psi2_uniform()


@dataclass(frozen=True, eq=False)
class DistSpec:
    """Mean-zero scalar law with a recorded ψ₂ bound ``psi2``.

    Non-sparse kinds have unit variance.  The ``sparse`` kind is
    ``Bernoulli(mu) * base`` and keeps variance ``mu`` (no rescaling).
    Use :func:`make_dist` rather than building instances by hand.
    """

    kind: str
    psi2: float
    atoms: Optional[tuple] = None
    base: Optional["DistSpec"] = None
    mu: Optional[float] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (np.isfinite(self.psi2) and self.psi2 > 0):
            raise ValueError("psi2 must be a positive finite number")
        if self.kind == "sparse":
            if self.base is None or self.base.kind == "sparse":
                raise ValueError("sparse kind needs a non-sparse base")
            if self.mu is None or not (0.0 < self.mu <= 1.0):
                raise ValueError("mu must lie in (0, 1]")
            return
        if self.kind in ("rademacher", "discrete"):
            if not self.atoms:
                raise ValueError("discrete law needs atoms")
            vals = np.array([a[0] for a in self.atoms], dtype=float)
            probs = np.array([a[1] for a in self.atoms], dtype=float)
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError("atom probabilities must be nonnegative and sum to 1")
            mean = float(probs @ vals)
            var = float(probs @ (vals - mean) ** 2)
            if abs(mean) > 1e-9 or abs(var - 1.0) > 1e-9:
                raise ValueError(f"atoms must have mean 0 and variance 1 (got {mean:.3g}, {var:.3g})")

    # ---- basic properties -------------------------------------------------
    @property
    def variance(self) -> float:
        return float(self.mu) if self.kind == "sparse" else 1.0

    @property
    def is_discrete(self) -> bool:
        if self.kind == "sparse":
            return self.base.is_discrete
        return self.kind in ("rademacher", "discrete")

    def atom_arrays(self):
        """Values and probabilities of a discrete law (sparse adds an atom at 0)."""
        if not self.is_discrete:
            raise ValueError(f"{self.kind} law has no atoms")
        if "atoms" in self._cache:
            return self._cache["atoms"]
        self._cache["atoms"] = self._atom_arrays()
        return self._cache["atoms"]

    def _atom_arrays(self):
        if self.kind == "sparse":
            v, p = self.base.atom_arrays()
            v = np.concatenate([[0.0], v])
            p = np.concatenate([[1.0 - self.mu], self.mu * p])
            return _merge_atoms(v, p)
        v = np.array([a[0] for a in self.atoms], dtype=float)
        p = np.array([a[1] for a in self.atoms], dtype=float)
        return _merge_atoms(v, p)

    def sym_atom_arrays(self):
        """Atoms of the symmetrization ξ̄ = ξ − ξ′."""
        if "sym" not in self._cache:
            v, p = self.atom_arrays()
            self._cache["sym"] = _merge_atoms((v[:, None] - v[None, :]).ravel(),
                                              (p[:, None] * p[None, :]).ravel())
        return self._cache["sym"]

    def char_fn(self, s):
        """Characteristic function E exp(i s ξ), vectorized over ``s``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "sparse":
            return 1.0 - self.mu + self.mu * self.base.char_fn(s)
        if self.kind == "gaussian":
            return np.exp(-0.5 * s * s) + 0j
        if self.kind == "uniform-symmetric":
            return np.sinc(SQRT3 * s / np.pi) + 0j
        v, p = self.atom_arrays()
        return np.exp(1j * s[..., None] * v) @ p

    def mean_cos_sym(self, s):
        """E cos(s ξ̄) = |E exp(i s ξ)|²."""
        return np.abs(self.char_fn(s)) ** 2

    def mgf_sq(self, t: float) -> float:
        """E exp((ξ/t)²); ``inf`` when it diverges."""
        if self.kind == "sparse":
            return 1.0 - self.mu + self.mu * self.base.mgf_sq(t)
        if self.kind == "gaussian":
            if t * t <= 2.0:
                return np.inf
            c = 0.5 - 1.0 / (t * t)
            val, _ = integrate.quad(lambda x: np.exp(-c * x * x), 0.0, np.inf, epsabs=1e-13)
            return float(2.0 * val / np.sqrt(2.0 * np.pi))
        if self.kind == "uniform-symmetric":
            val, _ = integrate.quad(lambda x: np.exp((x / t) ** 2), 0.0, SQRT3, epsabs=1e-13)
            return float(val / SQRT3)
        v, p = self.atom_arrays()
        with np.errstate(over="ignore"):
            return float(p @ np.exp((v / t) ** 2))

    # ---- sampling ---------------------------------------------------------
    @property
    def uniforms_needed(self) -> int:
        return 2 if self.kind == "sparse" else 1

    def transform(self, u, u2=None):
        """Map open uniforms to draws (``u2`` drives the sparse mask)."""
        if self.kind == "sparse":
            return self.base.transform(u) * (u2 < self.mu)
        if self.kind == "gaussian":
            return special.ndtri(u)
        if self.kind == "uniform-symmetric":
            return SQRT3 * (2.0 * u - 1.0)
        if self.kind == "rademacher":
            return np.where(u < 0.5, -1.0, 1.0)
        v, p = self.atom_arrays()
        cdf = np.cumsum(p)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(v) - 1)
        return v[idx]

    def sample(self, seed: SeedLike, size=None):
        rng = substream(seed)
        shape = () if size is None else size
        u = open_uniform(rng, shape)
        u2 = open_uniform(rng, shape) if self.kind == "sparse" else None
        out = self.transform(u, u2)
        return float(out) if size is None else out

    def sample_sym(self, seed: SeedLike, size):
        """Draws of ξ̄ = ξ − ξ′."""
        rng = substream(seed)
        return self.sample(rng, size) - self.sample(rng, size)

    def describe(self) -> str:
        if self.kind == "sparse":
            return f"sparse({self.base.describe()},mu={self.mu:.17g})"
        if self.kind == "discrete":
            return "discrete(" + ";".join(f"{v:.17g}:{p:.17g}" for v, p in self.atoms) + ")"
        return self.kind

    def __repr__(self):
        return f"DistSpec({self.describe()}, psi2={self.psi2:.6g})"


def _merge_atoms(values, probs, tol: float = 1e-12):
    order = np.argsort(values, kind="stable")
    v = np.asarray(values, dtype=float)[order]
    p = np.asarray(probs, dtype=float)[order]
    if v.size == 0:
        return v, p
    # new group whenever the gap to the running group start exceeds tol
    starts = [0]
    anchor = v[0]
    for i in range(1, v.size):
        if v[i] - anchor > tol:
            starts.append(i)
            anchor = v[i]
    starts = np.array(starts)
    return v[starts], np.add.reduceat(p, starts)


def psi2_estimate(dist: DistSpec, t_min: float = 0.05, t_max: float = 100.0, ratio: float = 1.01) -> float:
    """Smallest grid value ``t`` with E exp((ξ/t)²) ≤ 2.

    The grid is geometric (``t_min * ratio**j``); since the moment is
    decreasing in ``t`` a binary search over the grid index is exact.
    Discrete laws are evaluated on their atoms, continuous laws by quadrature.
    """
    jmax = int(np.floor(np.log(t_max / t_min) / np.log(ratio)))
    grid = t_min * ratio ** np.arange(jmax + 1)
    if not dist.mgf_sq(grid[-1]) <= 2.0:
        raise ValueError("no t <= t_max satisfies E exp((xi/t)^2) <= 2; tail too heavy")
    lo, hi = -1, jmax
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if dist.mgf_sq(grid[mid]) <= 2.0:
            hi = mid
        else:
            lo = mid
    return float(grid[hi])


def make_dist(kind: str, params: Optional[dict] = None) -> DistSpec:
    """Build a normalized :class:`DistSpec`.

    Parameters
    ----------
    kind : str
        ``rademacher``, ``gaussian``, ``uniform-symmetric``, ``discrete`` or
        ``sparse``.
    params : dict, optional
        ``{"atoms": [(value, prob), ...]}`` for ``discrete`` (recentred and
        rescaled to unit variance); ``{"base": DistSpec | str, "mu": float}``
        for ``sparse``.
    """
    params = dict(params or {})
    if kind == "rademacher":
        return DistSpec("rademacher", PSI2_RADEMACHER, atoms=((-1.0, 0.5), (1.0, 0.5)))
    if kind == "gaussian":
        return DistSpec("gaussian", PSI2_GAUSSIAN)
    if kind == "uniform-symmetric":
        return DistSpec("uniform-symmetric", PSI2_UNIFORM)
    if kind == "discrete":
        atoms = params.get("atoms")
        if not atoms:
            raise ValueError("discrete law needs a nonempty atom list")
        v = np.array([a[0] for a in atoms], dtype=float)
        p = np.array([a[1] for a in atoms], dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("atom probabilities must be nonnegative and sum to 1")
        mean = p @ v
        sd = np.sqrt(p @ (v - mean) ** 2)
        if not sd > 1e-12:
            raise ValueError("constant distribution cannot be normalized")
        norm_atoms = tuple((float((x - mean) / sd), float(q)) for x, q in zip(v, p) if q > 0)
        tmp = DistSpec("discrete", 1.0, atoms=norm_atoms)
        return DistSpec("discrete", psi2_estimate(tmp), atoms=norm_atoms)
    if kind == "sparse":
        base = params.get("base", "rademacher")
        if isinstance(base, str):
            base = make_dist(base)
        mu = float(params.get("mu", 1.0))
        if not (0.0 < mu <= 1.0):
            raise ValueError("mu must lie in (0, 1]")
        # ψ₂(δξ) ≤ ψ₂(ξ), so the base bound stays valid
        return DistSpec("sparse", base.psi2, base=base, mu=mu)
    raise ValueError(f"unknown distribution kind {kind!r}")


def parse_dist(text: str) -> DistSpec:
    """Parse ``gaussian``, ``sparse:rademacher:0.25`` or ``discrete:-1:0.5,1:0.5``."""
    parts = text.strip().split(":", 1)
    kind = parts[0]
    try:
        if kind == "sparse":
            base, mu = parts[1].rsplit(":", 1)
            return make_dist("sparse", {"base": parse_dist(base), "mu": float(mu)})
        if kind == "discrete":
            atoms = []
            for item in parts[1].split(","):
                v, p = item.split(":")
                atoms.append((float(v), float(p)))
            return make_dist("discrete", {"atoms": atoms})
    except (IndexError, ValueError) as exc:
        raise ValueError(f"cannot parse distribution {text!r}: {exc}") from None
    if len(parts) > 1:
        raise ValueError(f"{kind!r} takes no parameters")
    return make_dist(kind)


# ---------------------------------------------------------------------------
# matrix profiles
# ---------------------------------------------------------------------------

_TRIU_CACHE: dict = {}


def triu_indices(n: int):
    if n not in _TRIU_CACHE:
        _TRIU_CACHE[n] = np.triu_indices(n)
    return _TRIU_CACHE[n]


@dataclass(frozen=True, eq=False)
class MatrixProfile:
    """Law of a symmetric matrix with independent upper-triangular entries.

    Entry ``(i, j)`` with ``i <= j`` is ``scales[z] * ξ`` where
    ``z = zone_map[i, j]`` and ``ξ ~ dists[z]``.  ``scales`` is the variance
    knob (default 1).  ``shift_F`` is added and ``center_z * I`` subtracted
    after sampling.
    """

    n: int
    dists: tuple
    zone_map: Optional[np.ndarray] = None
    scales: Optional[tuple] = None
    shift_F: Optional[np.ndarray] = None
    center_z: Optional[float] = None
    pattern: str = "homogeneous"
    shift_norm: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.dists:
            raise ValueError("profile needs at least one distribution")
        nz = len(self.dists)
        if self.zone_map is not None:
            zm = np.asarray(self.zone_map)
            if zm.shape != (self.n, self.n):
                raise ValueError("zone_map must be n x n")
            if zm.min() < 0 or zm.max() >= nz:
                raise ValueError("zone_map refers to a missing zone")
        elif nz != 1:
            raise ValueError("several zones need a zone_map")
        if self.scales is not None and len(self.scales) != nz:
            raise ValueError("one scale per zone")
        if self.shift_F is not None:
            F = np.asarray(self.shift_F, dtype=float)
            if F.shape != (self.n, self.n):
                raise ValueError("shift_F must be n x n")
            norm = float(np.linalg.norm(F, 2))
            if not np.isfinite(norm):
                raise ValueError("shift_F must have finite operator norm")
            object.__setattr__(self, "shift_F", F)
            object.__setattr__(self, "shift_norm", norm)

    # ---- constructors ----------------------------------------------------
    @classmethod
    def homogeneous(cls, n: int, dist: DistSpec, shift_F=None, center_z=None, scale: float = 1.0):
        scales = None if scale == 1.0 else (float(scale),)
        return cls(n, (dist,), scales=scales, shift_F=shift_F, center_z=center_z)

    @classmethod
    def zoned(cls, n: int, dists: Sequence[DistSpec], pattern: str = "checkerboard",
              scales=None, bandwidth: int = 1, seed: int = 0, shift_F=None, center_z=None):
        """Named inhomogeneity patterns.

        ``checkerboard`` alternates zones by ``(i + j) mod Z``, ``banded``
        puts zone 0 on ``|i - j| < bandwidth`` and zone 1 elsewhere, and
        ``random`` assigns zones uniformly with a seeded draw.
        """
        dists = tuple(dists)
        nz = len(dists)
        i, j = np.indices((n, n))
        if pattern == "checkerboard":
            zm = (i + j) % nz
        elif pattern == "banded":
            if nz != 2:
                raise ValueError("banded pattern needs exactly two zones")
            zm = (np.abs(i - j) >= bandwidth).astype(int)
        elif pattern == "random":
            rng = substream(seed, 0xB0A)
            upper = rng.integers(0, nz, size=(n, n))
            zm = np.triu(upper) + np.triu(upper, 1).T
        else:
            raise ValueError(f"unknown zone pattern {pattern!r}")
        sc = None if scales is None else tuple(float(s) for s in scales)
        return cls(n, dists, zone_map=zm, scales=sc, shift_F=shift_F, center_z=center_z, pattern=pattern)

    @classmethod
    def literal(cls, n: int, entries: dict, default: Optional[DistSpec] = None, **kw):
        """Explicit ``{(i, j): DistSpec}`` map with ``i <= j``; only for n ≤ 64."""
        if n > 64:
            raise ValueError("literal profiles are limited to n <= 64")
        palette: list = []
        zm = np.full((n, n), -1, dtype=int)
        for (i, j), d in entries.items():
            if i > j:
                raise ValueError("literal entries must satisfy i <= j")
            if d not in palette:
                palette.append(d)
            zm[i, j] = zm[j, i] = palette.index(d)
        if np.any(zm < 0):
            if default is None:
                raise ValueError("missing entries and no default distribution")
            palette.append(default)
            zm[zm < 0] = len(palette) - 1
        return cls(n, tuple(palette), zone_map=zm, pattern="literal", **kw)

    def entry(self, i: int, j: int) -> DistSpec:
        if i > j:
            raise KeyError("only upper-triangular entries (i <= j) are stored")
        if self.zone_map is None:
            return self.dists[0]
        return self.dists[int(self.zone_map[i, j])]

    def describe(self) -> dict:
        return {
            "n": self.n,
            "pattern": self.pattern,
            "dists": [d.describe() for d in self.dists],
            "scales": list(self.scales) if self.scales else None,
            "shift_norm": self.shift_norm,
            "center_z": self.center_z,
        }


def _upper_values(profile: MatrixProfile, rng: np.random.Generator) -> np.ndarray:
    n = profile.n
    iu = triu_indices(n)
    cnt = iu[0].size
    u = open_uniform(rng, cnt)
    need2 = any(d.kind == "sparse" for d in profile.dists)
    u2 = open_uniform(rng, cnt) if need2 else None
    if profile.zone_map is None:
        vals = profile.dists[0].transform(u, u2)
        if profile.scales:
            vals = vals * profile.scales[0]
        return vals
    zones = profile.zone_map[iu]
    vals = np.empty(cnt)
    for z, d in enumerate(profile.dists):
        sel = zones == z
        vals[sel] = d.transform(u[sel], None if u2 is None else u2[sel])
        if profile.scales:
            vals[sel] *= profile.scales[z]
    return vals


def sample_symmetric(profile: MatrixProfile, seed: SeedLike) -> np.ndarray:
    """One draw of ``A (+ F) (- z I)`` with ``A[i, j] == A[j, i]`` bitwise."""
    rng = substream(seed)
    n = profile.n
    iu = triu_indices(n)
    vals = _upper_values(profile, rng)
    A = np.empty((n, n))
    A[iu] = vals
    A[iu[1], iu[0]] = vals
    if profile.shift_F is not None:
        # add F symmetrically so that exact symmetry survives
        F = profile.shift_F
        Fs = np.empty((n, n))
        Fs[iu] = F[iu]
        Fs[iu[1], iu[0]] = F[iu]
        A += Fs
    if profile.center_z:
        A[np.diag_indices(n)] -= profile.center_z
    return A


def sample_vector(dists, seed: SeedLike, trials: Optional[int] = None) -> np.ndarray:
    """Vector with independent coordinates ``x_j ~ dists[j]``.

    With ``trials`` set, returns a ``(trials, n)`` array of independent rows.
    """
    dists = list(dists)
    rng = substream(seed)
    n = len(dists)
    shape = (n,) if trials is None else (trials, n)
    u = open_uniform(rng, shape)
    need2 = any(d.kind == "sparse" for d in dists)
    u2 = open_uniform(rng, shape) if need2 else None
    out = np.empty(shape)
    groups: dict = {}
    for j, d in enumerate(dists):
        groups.setdefault(id(d), (d, []))[1].append(j)
    for d, cols in groups.values():
        cols = np.array(cols)
        out[..., cols] = d.transform(u[..., cols], None if u2 is None else u2[..., cols])
    return out


def sample_phi_mu(d: int, mu: float, base: DistSpec, seed: SeedLike, trials: Optional[int] = None) -> np.ndarray:
    """Sparse vector in Φ_μ(d, ξ): coordinate ``j`` is ``Bernoulli(mu) * ξ_j``."""
    if not (0.0 < mu <= 1.0):
        raise ValueError("mu must lie in (0, 1]")
    if mu == 1.0:
        return sample_vector([base] * d, seed, trials)
    sp = make_dist("sparse", {"base": base, "mu": mu})
    return sample_vector([sp] * d, seed, trials)


# ---------------------------------------------------------------------------
# zeroed-out matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZeroedOutSpec:
    """Shape and law of the block matrix keeping only ``H₁`` and ``H₁ᵀ``.

    The output is ``m x n`` with ``m = n - k``.  ``H₁`` occupies rows
    ``d..m-1`` and columns ``0..d-1``; its transpose occupies rows
    ``0..d-1`` and columns ``d..m-1``.  Row ``r`` of ``H₁`` lies in
    Φ_ν(d, ξ) with ξ read off the base profile at entry ``(c, d + r)``.
    """

    n: int
    k: int
    d: int
    nu: float = 2.0**-14
    base_profile: Optional[MatrixProfile] = None

    def __post_init__(self):
        if self.n < 2 or self.k < 0 or self.d < 1:
            raise ValueError("need n >= 2, k >= 0, d >= 1")
        if not self.d < self.m:
            raise ValueError("zeroed-out matrix needs d < n - k")
        if not (0.0 < self.nu <= 1.0):
            raise ValueError("nu must lie in (0, 1]")
        if self.base_profile is None:
            object.__setattr__(self, "base_profile", MatrixProfile.homogeneous(self.n, make_dist("rademacher")))
        elif self.base_profile.n != self.n:
            raise ValueError("base profile dimension does not match n")

    @property
    def m(self) -> int:
        return self.n - self.k

    def h1_dists(self):
        """Per-entry sparse laws of H₁, shape ``(m - d, d)`` (object array)."""
        bp = self.base_profile
        out = np.empty((self.m - self.d, self.d), dtype=object)
        cache: dict = {}
        for r in range(self.m - self.d):
            for c in range(self.d):
                base = bp.entry(c, self.d + r)
                if id(base) not in cache:
                    cache[id(base)] = base if self.nu == 1.0 else make_dist("sparse", {"base": base, "mu": self.nu})
                out[r, c] = cache[id(base)]
        return out


def sample_h1(spec: ZeroedOutSpec, seed: SeedLike, trials: Optional[int] = None) -> np.ndarray:
    """Draws of the ``(m - d) x d`` block H₁ (leading ``trials`` axis if given)."""
    laws = spec.h1_dists().ravel()
    flat = sample_vector(laws, seed, trials)
    shape = (spec.m - spec.d, spec.d)
    return flat.reshape(shape if trials is None else (trials,) + shape)


def build_zeroed_out(spec: ZeroedOutSpec, seed: SeedLike) -> np.ndarray:
    H1 = sample_h1(spec, seed)
    M = np.zeros((spec.m, spec.n))
    M[spec.d:, : spec.d] = H1
    M[: spec.d, spec.d: spec.m] = H1.T
    return M


def matrix_to_csv(A: np.ndarray) -> str:
    """Row-major CSV with 17 significant digits and LF endings."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return "".join(",".join(f"{x:.17g}" for x in row) + "\n" for row in A)
