"""Torus norms, ξ-weighted norms and least-common-denominator scans.

Notation: ``f(y) = dist(y, Z)**2`` and ``‖x‖_ξ² = Σ_i E f(x_i ξ̄_i)`` where
ξ̄ = ξ − ξ′.  Logs are natural and ``log₊(x) = max(ln x, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from ._rng import SeedLike, substream
from .ensembles import SQRT3, DistSpec, ZeroedOutSpec, sample_h1, sample_vector
from .stats import dkw_halfwidth, wilson_interval


def torus_norm(x) -> float:
    """Euclidean distance from ``x`` to the integer lattice."""
    x = np.asarray(x, dtype=float)
    r = x - np.rint(x)
    return float(np.sqrt(np.sum(r * r)))


def _torus_sq(y):
    r = y - np.rint(y)
    return r * r


# ---------------------------------------------------------------------------
# E f(Y) for the continuous building blocks
# ---------------------------------------------------------------------------

_J = np.arange(-8, 9, dtype=float)
_K = np.arange(1, 7, dtype=float)


def _tsq_gauss(s):
    """E f(Y) for Y ~ N(0, s²), elementwise in ``s``."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    big = s >= 0.5
    if np.any(big):
        sb = s[big][..., None]
        terms = (-1.0) ** _K / (np.pi**2 * _K**2) * np.exp(-2.0 * np.pi**2 * _K**2 * sb**2)
        out[big] = 1.0 / 12.0 + terms.sum(-1)
    # below 0.02 the lattice terms are under exp(-300): E f = s²
    tiny = s < 0.02
    out[tiny] = s[tiny] ** 2
    small = (~big) & (~tiny)
    if np.any(small):
        ss = s[small][..., None]
        m = -_J
        a = (-0.5 - m) / ss
        b = (0.5 - m) / ss
        dPhi = special.ndtr(b) - special.ndtr(a)
        # ndtr differences lose precision in the far right tail; use the
        # symmetric form there
        right = a > 0
        dPhi = np.where(right, special.ndtr(-a) - special.ndtr(-b), dPhi)
        pa = np.exp(-0.5 * a * a) / np.sqrt(2 * np.pi)
        pb = np.exp(-0.5 * b * b) / np.sqrt(2 * np.pi)
        val = m * m * dPhi + 2.0 * m * ss * (pa - pb) + ss * ss * (dPhi + a * pa - b * pb)
        out[small] = val.sum(-1)
    return out


def _F(y):
    # antiderivative of f, odd
    fl = np.floor(y)
    r = y - fl
    g = np.where(r <= 0.5, r**3 / 3.0, 1.0 / 12.0 - (1.0 - r) ** 3 / 3.0)
    return fl / 12.0 + g


def _Q(y):
    # periodic part of the second antiderivative of f
    r = y - np.floor(y)
    lo = r**4 / 12.0 - r**2 / 24.0
    hi = (-1.0 / 192.0 + (r - 0.5) / 12.0 - (r * r - 0.25) / 24.0
          + ((1.0 - r) ** 4 - 1.0 / 16.0) / 12.0)
    return np.where(r <= 0.5, lo, hi)


def _tsq_unif(h):
    """E f(Y) for Y uniform on [−h, h]."""
    h = np.abs(np.asarray(h, dtype=float))
    out = np.zeros_like(h)
    nz = h > 0
    out[nz] = _F(h[nz]) / h[nz]
    return out


def _tsq_tri(h):
    """E f(U₁ − U₂) for U₁, U₂ independent uniform on [−h, h]."""
    h = np.abs(np.asarray(h, dtype=float))
    out = (2.0 / 3.0) * h * h
    big = h > 0.25
    hb = h[big]
    out[big] = 1.0 / 12.0 + _Q(2.0 * hb) / (2.0 * hb * hb)
    return out


def xi_sq_terms(a, dist: DistSpec):
    """E‖a ξ̄‖_T² elementwise in ``a`` (exact, closed forms)."""
    a = np.asarray(a, dtype=float)
    if dist.is_discrete:
        y, p = dist.sym_atom_arrays()
        return _torus_sq(a[..., None] * y) @ p
    if a.ndim == 0:
        return xi_sq_terms(a[None], dist)[0]
    if dist.kind == "gaussian":
        return _tsq_gauss(np.sqrt(2.0) * a)
    if dist.kind == "uniform-symmetric":
        return _tsq_tri(SQRT3 * a)
    # sparse with continuous base: ξ̄ is 0, ±ξ or ξ − ξ′
    mu = dist.mu
    base = dist.base
    if base.kind == "gaussian":
        one, two = _tsq_gauss(a), _tsq_gauss(np.sqrt(2.0) * a)
    else:
        one, two = _tsq_unif(SQRT3 * a), _tsq_tri(SQRT3 * a)
    return 2.0 * mu * (1.0 - mu) * one + mu * mu * two


# ---- piecewise Gauss-Legendre oracle for continuous laws -------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _piecewise_expect(a: float, pdf, lo: float, hi: float, kinks=()):
    """∫ f(a y) pdf(y) dy over [lo, hi] by 64-node rules between kinks."""
    pts = set([lo, hi, *[k for k in kinks if lo < k < hi]])
    if a != 0:
        j0 = int(np.floor(min(a * lo, a * hi) - 0.5))
        j1 = int(np.ceil(max(a * lo, a * hi) + 0.5))
        for j in range(j0, j1 + 1):
            y = (j + 0.5) / a
            if lo < y < hi:
                pts.add(y)
    pts = np.array(sorted(pts))
    left, right = pts[:-1], pts[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    y = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = _torus_sq(a * y) * pdf(y)
    return float(np.sum(half[:, None] * _GL_W[None, :] * vals))


def _quad_term(a: float, dist: DistSpec) -> float:
    if dist.is_discrete:
        return float(xi_sq_terms(a, dist))
    if dist.kind == "sparse":
        mu = dist.mu
        one = _quad_single(a, dist.base)
        two = _quad_term(a, dist.base)
        return 2.0 * mu * (1.0 - mu) * one + mu * mu * two
    if dist.kind == "gaussian":
        pdf = lambda y: np.exp(-0.25 * y * y) / np.sqrt(4.0 * np.pi)
        R = 40.0
        return _piecewise_expect(a, pdf, -R, R, kinks=np.arange(-R, R + 1.0))
    h = 2.0 * SQRT3
    pdf = lambda y: np.clip(h - np.abs(y), 0.0, None) / (h * h)
    return _piecewise_expect(a, pdf, -h, h, kinks=(0.0,))


def _quad_single(a: float, base: DistSpec) -> float:
    # E f(a ξ) for the (unsymmetrized) base law
    if base.kind == "gaussian":
        pdf = lambda y: np.exp(-0.5 * y * y) / np.sqrt(2.0 * np.pi)
        return _piecewise_expect(a, pdf, -28.0, 28.0, kinks=np.arange(-28.0, 29.0))
    pdf = lambda y: np.full_like(y, 1.0 / (2.0 * SQRT3))
    return _piecewise_expect(a, pdf, -SQRT3, SQRT3)


def _per_coordinate(x, dist, fn):
    x = np.asarray(x, dtype=float)
    if isinstance(dist, DistSpec):
        return fn(x, dist)
    dists = list(dist)
    if len(dists) != x.shape[-1]:
        raise ValueError("need one distribution per coordinate")
    out = np.empty_like(x)
    groups: dict = {}
    for j, d in enumerate(dists):
        groups.setdefault(id(d), (d, []))[1].append(j)
    for d, cols in groups.values():
        out[..., cols] = fn(x[..., cols], d)
    return out


def xi_norm(x, dist, method: str = "exact", trials: int = 100_000, seed: SeedLike = 0):
    """‖x‖_ξ = (E‖x ⋆ ξ̄‖_T²)^{1/2}.

    Parameters
    ----------
    x : array_like
        Vector, or a batch with coordinates along the last axis (exact only).
    dist : DistSpec or sequence of DistSpec
        Law of each coordinate of ξ.
    method : {"exact", "quadrature", "mc"}
        ``exact`` enumerates ξ̄ atoms for discrete laws (at most 16 base
        atoms) and uses closed forms for gaussian and uniform laws.
        ``quadrature`` integrates piecewise with 64-node Gauss-Legendre rules.
        ``mc`` averages ``trials`` draws; see :func:`xi_norm_mc` for the error.
    """
    if method == "exact":
        def fn(a, d):
            if d.is_discrete and d.atom_arrays()[0].size > 17:
                raise ValueError("exact mode supports at most 16 atoms per coordinate")
            return xi_sq_terms(a, d)
        return np.sqrt(_per_coordinate(x, dist, fn).sum(-1))
    if method == "quadrature":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError("quadrature mode takes a single vector")
        fn = lambda a, d: np.array([_quad_term(float(ai), d) for ai in a])
        return float(np.sqrt(_per_coordinate(x, dist, fn).sum()))
    if method == "mc":
        return xi_norm_mc(x, dist, trials, seed)[0]
    raise ValueError(f"unknown method {method!r}")


def xi_norm_mc(x, dist, trials: int = 100_000, seed: SeedLike = 0, chunk: int = 8192):
    """Monte Carlo ‖x‖_ξ with a delta-method standard error."""
    x = np.asarray(x, dtype=float)
    if trials < 100_000:
        raise ValueError("mc mode needs at least 1e5 draws")
    dists = [dist] * x.size if isinstance(dist, DistSpec) else list(dist)
    rng = substream(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        xb = sample_vector(dists, rng, b) - sample_vector(dists, rng, b)
        s = _torus_sq(xb * x).sum(-1)
        total += s.sum()
        total_sq += (s * s).sum()
        done += b
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    value = float(np.sqrt(mean))
    se = float(np.sqrt(var / trials) / (2.0 * value)) if value > 0 else 0.0
    return value, se


# ---------------------------------------------------------------------------
# LCD family
# ---------------------------------------------------------------------------

def log_plus(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(np.maximum(x, 1e-300)), 0.0)


@dataclass(frozen=True)
class LcdParams:
    """Scan settings for the LCD infima.

    ``ratio`` is the geometric radius step (grid points ``ratio**j``),
    ``rel_tol`` the bisection width and ``angular_res`` the spacing of the
    direction net for two- and three-dimensional searches.
    """

    L: float
    alpha: float
    theta_max: float = 1e3
    mode: str = "vector"
    ratio: float = 1.001
    rel_tol: float = 1e-6
    angular_res: float = 0.01
    n_starts: int = 256
    seed: int = 0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if not (np.isfinite(self.theta_max) and self.theta_max > 0):
            raise ValueError("theta_max must be finite and positive")
        if self.mode not in ("vector", "subspace", "matrix-rd"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.ratio > 1.0:
            raise ValueError("ratio must exceed 1")


@dataclass
class RlogDResult:
    """Bracket ``[lo, hi]`` for an LCD infimum.

    ``hi`` is backed by ``witness`` (re-checkable); ``hi = inf`` means no
    witness up to ``theta_max``.  ``lo`` is a grid-level estimate: no grid
    point below it was a witness.  ``heuristic`` marks searches where ``lo``
    carries no information (set to 0).
    """

    lo: float
    hi: float
    witness: Optional[np.ndarray]
    evaluations: int
    heuristic: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.witness is not None


def lcd_holds(y, gate, L: float, alpha: float, dist) -> np.ndarray:
    """Strict defining inequality ‖y‖_ξ < L √log₊(α·gate/L), batched over rows."""
    lhs = xi_norm(y, dist)
    rhs = L * np.sqrt(log_plus(alpha * np.asarray(gate, dtype=float) / L))
    return lhs < rhs


def _scan_direction(v, g, params: LcdParams, dist, r_cap: float, chunk: int = 256):
    """First witness radius r·v for a fixed direction (gate value r·g).

    Returns ``(lo, hi, evals)``; ``hi = inf`` if none up to ``r_cap``.
    """
    L, alpha = params.L, params.alpha
    lr = np.log(params.ratio)
    r0 = L / (alpha * g)  # below this the gate is closed
    if not r0 < r_cap:
        return r_cap, np.inf, 0
    j = int(np.floor(np.log(r0) / lr)) + 1
    jend = int(np.floor(np.log(r_cap) / lr))
    evals = 0
    prev = r0
    while j <= jend:
        js = np.arange(j, min(j + chunk, jend + 1))
        rs = np.exp(js * lr)
        ok = lcd_holds(rs[:, None] * v[None, :], rs * g, L, alpha, dist)
        evals += rs.size
        if np.any(ok):
            first = int(np.argmax(ok))
            lo = rs[first - 1] if first > 0 else prev
            hi = rs[first]
            while hi - lo > params.rel_tol * hi:
                mid = 0.5 * (lo + hi)
                evals += 1
                if lcd_holds(mid * v, mid * g, L, alpha, dist):
                    hi = mid
                else:
                    lo = mid
            return lo, hi, evals
        prev = rs[-1]
        j = js[-1] + 1
    return r_cap, np.inf, evals


def rlogd_vector(v, params: LcdParams, dist) -> RlogDResult:
    """log-RLCD of a single vector: inf θ > 0 with ‖θv‖_ξ < L√log₊(αθ‖v‖/L)."""
    v = np.asarray(v, dtype=float)
    nv = float(np.linalg.norm(v))
    if nv == 0:
        raise ValueError("v must be nonzero")
    lo, hi, ev = _scan_direction(v, nv, params, dist, params.theta_max)
    w = None if not np.isfinite(hi) else np.array([hi])
    return RlogDResult(lo, hi, w, ev, meta=_meta(params, "vector", 1))


def _meta(params, mode, ndir):
    return {"mode": mode, "L": params.L, "alpha": params.alpha, "theta_max": params.theta_max,
            "ratio": params.ratio, "rel_tol": params.rel_tol, "directions": ndir}


def direction_net(m: int, angular_res: float) -> np.ndarray:
    """Unit directions up to sign: {+1}, a half circle, or a hemisphere."""
    if m == 1:
        return np.ones((1, 1))
    if m == 2:
        k = int(np.ceil(np.pi / angular_res))
        ang = np.arange(k) * (np.pi / k)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if m == 3:
        # Fibonacci points on the upper hemisphere, spacing ~ angular_res
        k = int(np.ceil(2.0 * np.pi / angular_res**2))
        i = np.arange(k) + 0.5
        z = i / k
        phi = np.pi * (1.0 + np.sqrt(5.0)) * i
        r = np.sqrt(1.0 - z * z)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise ValueError("direction nets are only built for m <= 3")


def _scan_matrix(V, params: LcdParams, dist, gate: str, mode: str) -> RlogDResult:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if not np.any(V):
        raise ValueError("V must be nonzero")
    m = V.shape[0]
    row_sq = np.sum(V * V, axis=1)

    def gate_of(U):
        if gate == "rows":
            return np.sqrt((U * U) @ row_sq)
        return np.linalg.norm(U @ V, axis=1)

    if m <= 3:
        U = direction_net(m, params.angular_res)
        heuristic = False
    else:
        rng = substream(params.seed, 0x1CD)
        U = rng.standard_normal((params.n_starts, m))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        heuristic = True
    G = gate_of(U)
    best_hi, best_u, best_lo = np.inf, None, params.theta_max
    evals = 0
    # visit directions with large gate first: they open earliest
    for idx in np.argsort(-G, kind="stable"):
        if G[idx] == 0:
            continue
        cap = min(params.theta_max, best_hi)
        lo, hi, ev = _scan_direction(U[idx] @ V, G[idx], params, dist, cap)
        evals += ev
        best_lo = min(best_lo, lo)
        if hi < best_hi:
            best_hi, best_u = hi, U[idx]
    if heuristic and best_u is not None:
        # local refinement around the best start
        rng = substream(params.seed, 0x1CE)
        step = 0.2
        for _ in range(60):
            cand = best_u + step * rng.standard_normal(m)
            cand /= np.linalg.norm(cand)
            g = gate_of(cand[None, :])[0]
            if g == 0:
                continue
            lo, hi, ev = _scan_direction(cand @ V, g, params, dist, best_hi)
            evals += ev
            if hi < best_hi:
                best_hi, best_u = hi, cand
            else:
                step *= 0.9
    witness = None if best_u is None else best_hi * best_u
    lo = 0.0 if heuristic else min(best_lo, best_hi)
    return RlogDResult(lo, best_hi, witness, evals, heuristic, meta=_meta(params, mode, len(U)))


def rlogd_matrix(V, params: LcdParams, dist) -> RlogDResult:
    """log-RLCD of an m×n matrix with gate ‖θ‖_V = (Σ‖V_i‖²θ_i²)^{1/2} over rows V_i."""
    return _scan_matrix(V, params, dist, "rows", "matrix")


def rlogd_subspace(basis, params: LcdParams, dist) -> RlogDResult:
    """log-RLCD of E = span(basis); the witness is a vector y ∈ E.

    Parameters
    ----------
    basis : array_like, shape (dim, n)
        Rows spanning E (orthonormalized internally).
    """
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    Q, R = np.linalg.qr(B.T)
    if np.min(np.abs(np.diag(R))) <= 1e-12 * np.max(np.abs(np.diag(R))):
        raise ValueError("basis vectors are linearly dependent")
    res = _scan_matrix(Q.T, params, dist, "image", "subspace")
    if res.witness is not None:
        res.witness = Q @ res.witness
    return res


@dataclass
class RdReport:
    rd: RlogDResult
    sandwich: Optional[dict] = None


def rd_matrix(V, params: LcdParams, dist, sandwich: bool = False):
    """RLCD with gate ‖Vᵀθ‖₂.

    With ``sandwich=True`` and ¼-almost orthogonal rows, also returns the
    three scans RD_{L,4α}, RlogD_{L,α}, RD_{L,α/4} on a shared net.
    """
    res = _scan_matrix(V, params, dist, "image", "matrix-rd")
    if not sandwich:
        return res
    from .geometry import almost_orthogonal_defect

    V = np.atleast_2d(np.asarray(V, dtype=float))
    defect = almost_orthogonal_defect(V)
    out = {"defect": defect, "applies": defect <= 0.25}
    if out["applies"]:
        from dataclasses import replace

        a = params.alpha
        if 4 * a < 1:
            out["rd_4alpha"] = _scan_matrix(V, replace(params, alpha=4 * a), dist, "image", "matrix-rd").hi
        else:
            out["rd_4alpha"] = None
        out["rlogd"] = rlogd_matrix(V, params, dist).hi
        out["rd_alpha_over_4"] = _scan_matrix(V, replace(params, alpha=a / 4), dist, "image", "matrix-rd").hi
    return RdReport(res, out)


# ---------------------------------------------------------------------------
# level sets and the threshold function
# ---------------------------------------------------------------------------

def _gaussian_theta(rng, trials: int, l: int):
    return rng.standard_normal((trials, l)) / np.sqrt(2.0 * np.pi)


def xi_norm_sq_batch(W, thetas, dist, chunk: int = 4096):
    """‖Wθ‖_ξ² for each row θ of ``thetas``."""
    W = np.asarray(W, dtype=float)
    out = np.empty(len(thetas))
    for s in range(0, len(thetas), chunk):
        Y = thetas[s:s + chunk] @ W.T
        out[s:s + chunk] = _per_coordinate(Y, dist, xi_sq_terms).sum(-1)
    return out


def level_set_gaussian_measure(W, t: float, dist, trials: int = 10_000, seed: SeedLike = 0):
    """γ_l(S_W(t)) with S_W(t) = {θ : ‖Wθ‖_ξ ≤ √t}, θ ~ N(0, (2π)⁻¹ I_l).

    Returns ``(estimate, (ci_lo, ci_hi))`` with a Wilson 95% interval.
    """
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    W = np.atleast_2d(np.asarray(W, dtype=float))
    rng = substream(seed)
    th = _gaussian_theta(rng, trials, W.shape[1])
    q = xi_norm_sq_batch(W, th, dist)
    k = int(np.sum(q <= t))
    return k / trials, wilson_interval(k, trials)


def level_set_containment_check(W, t: float, dist, pairs: int = 10_000, seed: SeedLike = 0,
                                max_draws: int = 2_000_000):
    """Check θ₁ − θ₂ ∈ S(4t) for sampled θ₁, θ₂ ∈ S(t).

    Returns ``(checked_pairs, failures)``.  A relative slack of 1e-12 covers
    rounding in the comparison.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    rng = substream(seed)
    inside = []
    have = 0
    drawn = 0
    while have < 2 * pairs and drawn < max_draws:
        th = _gaussian_theta(rng, 20_000, W.shape[1])
        drawn += len(th)
        keep = th[xi_norm_sq_batch(W, th, dist) <= t]
        inside.append(keep)
        have += len(keep)
    pts = np.concatenate(inside)[: 2 * pairs]
    npairs = len(pts) // 2
    diff = pts[:npairs] - pts[npairs: 2 * npairs]
    q = xi_norm_sq_batch(W, diff, dist)
    fails = int(np.sum(q > 4.0 * t * (1.0 + 1e-12)))
    return npairs, fails


@dataclass
class ThresholdResult:
    estimate: float
    lo: float
    hi: float
    trials: int


def _gL_from_norms(norms, n: int, m: int, L: float, shift: float = 0.0) -> float:
    """sup{t ∈ [0,1] : F(t) ≥ (4Lt)^m} for the empirical CDF of ``norms/√n`` moved by ``shift``."""
    x = np.sort(np.asarray(norms, dtype=float) / np.sqrt(n))
    T = x.size
    levels = np.clip(np.arange(1, T + 1) / T + shift, 0.0, 1.0)
    # on [x_j, x_{j+1}) the CDF equals levels[j]
    caps = levels ** (1.0 / m) / (4.0 * L)
    right = np.append(x[1:], np.inf)
    cand = np.minimum(np.minimum(right, caps), 1.0)
    ok = cand >= x
    best = float(cand[ok].max()) if np.any(ok) else 0.0
    if shift > 0:
        # the raised CDF is positive below the first sample too
        c0 = min(shift ** (1.0 / m) / (4.0 * L), x[0], 1.0)
        best = max(best, c0)
    return best


def threshold_gL(v, n: int, k: int, L: float, spec: ZeroedOutSpec, trials: int = 10_000,
                 seed: SeedLike = 0) -> ThresholdResult:
    """g_L(v, k) = sup{t ∈ [0,1] : P(‖M_k v‖ ≤ t√n) ≥ (4Lt)^{n−k}}.

    The estimate uses the exact supremum for the empirical CDF; the bracket
    comes from the 95% DKW band around it.
    """
    if spec.n != n or spec.k != k:
        raise ValueError("n, k disagree with the zeroed-out spec")
    m = n - k
    if m > 20:
        raise ValueError("threshold function is only estimable for n - k <= 20")
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValueError("v must have length n")
    norms = zeroed_out_norms(v, spec, trials, seed)
    est = _gL_from_norms(norms, n, m, L)
    eps = dkw_halfwidth(trials)
    lo = _gL_from_norms(norms, n, m, L, -eps)
    hi = _gL_from_norms(norms, n, m, L, eps)
    return ThresholdResult(est, lo, hi, trials)


def zeroed_out_norms(v, spec: ZeroedOutSpec, trials: int, seed: SeedLike = 0, chunk: int = 8192):
    """Samples of ‖M_k v‖₂ without forming M_k."""
    v = np.asarray(v, dtype=float)
    d, m = spec.d, spec.m
    rng = substream(seed)
    out = np.empty(trials)
    for s in range(0, trials, chunk):
        b = min(chunk, trials - s)
        H = sample_h1(spec, rng, b)
        top = np.einsum("trc,r->tc", H, v[d:m])
        bot = H @ v[:d]
        out[s:s + b] = np.sqrt(np.sum(top * top, -1) + np.sum(bot * bot, -1))
    return out
