"""Lévy concentration estimates, enumeration oracles and Fourier-side bounds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from ._rng import SeedLike, substream
from .arithmetic import _torus_sq, xi_norm_sq_batch, xi_sq_terms
from .ensembles import DistSpec, _merge_atoms, make_dist, sample_phi_mu, sample_vector
from .stats import wilson_interval


@dataclass
class LevyEstimate:
    """Estimate of sup_w P(‖X − w‖ ≤ t).

    For ``method="mc"`` the value is the plug-in supremum over the candidate
    centers.  ``ci_low`` is the Wilson lower bound of a cross-fitted count
    (center chosen on one half, counted on the other), ``ci_high`` the
    Wilson upper bound of the plug-in count.
    """

    value: float
    ci_low: float
    ci_high: float
    method: str
    size: int
    center: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _best_window_1d(x, t):
    xs = np.sort(x)
    hi = np.searchsorted(xs, xs + 2.0 * t, side="right")
    counts = hi - np.arange(xs.size)
    i = int(np.argmax(counts))
    return xs[i] + t, int(counts[i])


def _ball_counts(pts, centers, t, chunk=256):
    out = np.empty(len(centers), dtype=np.int64)
    t2 = t * t
    for s in range(0, len(centers), chunk):
        c = centers[s:s + chunk]
        d2 = np.sum((pts[None, :, :] - c[:, None, :]) ** 2, axis=-1)
        out[s:s + chunk] = np.sum(d2 <= t2, axis=1)
    return out


def _best_center_nd(pts, t, grid, n_candidates, shift_iters=5):
    if grid is not None:
        cand = np.asarray(grid, dtype=float)
    else:
        start = pts[: min(n_candidates, len(pts))].copy()
        cand = start
        # mean-shift toward local modes
        for _ in range(shift_iters):
            new = np.empty_like(cand)
            for s in range(0, len(cand), 64):
                c = cand[s:s + 64]
                inside = np.sum((pts[None] - c[:, None]) ** 2, -1) <= t * t
                w = inside.sum(1, keepdims=True)
                new[s:s + 64] = np.where(w > 0, inside @ pts / np.maximum(w, 1), c)
            cand = new
        cand = np.concatenate([start, cand])
        cand = np.unique(cand, axis=0)
    counts = _ball_counts(pts, cand, t)
    i = int(np.argmax(counts))
    return cand[i], int(counts[i])


def levy_mc(sampler: Callable, t: float, trials: int = 100_000, center_search_grid=None,
            seed: SeedLike = 0, n_candidates: int = 256) -> LevyEstimate:
    """Monte Carlo Lévy concentration of a random vector.

    Parameters
    ----------
    sampler : callable
        ``sampler(rng, size)`` returning ``size`` draws, shape ``(size,)`` or
        ``(size, dim)``.  An array of precomputed draws is also accepted.
    t : float
        Ball radius.
    center_search_grid : array_like, optional
        Explicit candidate centers.  By default one-dimensional samples use
        the exact empirical supremum and higher dimensions use sampled points
        refined by a few mean-shift steps.
    """
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    if center_search_grid is not None and len(np.atleast_1d(center_search_grid)) == 0:
        raise ValueError("empty center grid")
    if callable(sampler):
        X = np.asarray(sampler(substream(seed), trials), dtype=float)
    else:
        X = np.asarray(sampler, dtype=float)
    T = X.shape[0]
    if X.ndim == 1:
        X = X[:, None]
    half = T // 2
    A, B = X[:half], X[half:]
    grid = None if center_search_grid is None else np.asarray(center_search_grid, dtype=float).reshape(-1, X.shape[1])

    def select(P):
        if X.shape[1] == 1 and grid is None:
            w, c = _best_window_1d(P[:, 0], t)
            return np.array([w]), c
        return _best_center_nd(P, t, grid, n_candidates)

    def count(P, w):
        return int(np.sum(np.sum((P - w) ** 2, axis=1) <= t * t))

    wA, _ = select(A)
    wB, _ = select(B)
    cross = count(B, wA) + count(A, wB)
    w, full = select(X)
    # the plug-in center may differ; keep the better of the three on all data
    for cand in (wA, wB):
        c = count(X, cand)
        if c > full:
            w, full = cand, c
    lo, _ = wilson_interval(cross, T)
    _, hi = wilson_interval(full, T)
    value = full / T
    return LevyEstimate(value, min(lo, value), max(hi, value), "mc", T, w)


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def sum_distribution(v, dist: DistSpec, symmetrized: bool = False, max_outcomes: int = 2**24):
    """Atoms and masses of Σ v_i ξ_i (or ξ̄_i), merged within 1e-12."""
    v = np.asarray(v, dtype=float).ravel()
    if not dist.is_discrete:
        raise ValueError("exact enumeration needs a discrete law")
    a, p = dist.sym_atom_arrays() if symmetrized else dist.atom_arrays()
    if float(a.size) ** v.size > max_outcomes:
        raise ValueError("enumeration blowup: too many outcomes")
    vals, mass = np.zeros(1), np.ones(1)
    for vi in v:
        vals, mass = _merge_atoms((vals[:, None] + vi * a[None, :]).ravel(),
                                  (mass[:, None] * p[None, :]).ravel())
    return vals, mass


def levy_exact_discrete(v, dist: DistSpec, t: float, symmetrized: bool = False) -> LevyEstimate:
    """Exact sup_w P(|⟨v, ξ⟩ − w| ≤ t) by enumeration and a sliding window."""
    vals, mass = sum_distribution(v, dist, symmetrized)
    hi = np.searchsorted(vals, vals + 2.0 * t + 1e-12, side="right")
    cum = np.concatenate([[0.0], np.cumsum(mass)])
    win = cum[hi] - cum[: vals.size]
    i = int(np.argmax(win))
    value = float(min(win[i], 1.0))
    return LevyEstimate(value, value, value, "exact", int(vals.size), np.array([vals[i] + t]))


# ---------------------------------------------------------------------------
# characteristic function and cosine bounds
# ---------------------------------------------------------------------------

@dataclass
class CharFnValue:
    value: float
    upper: float
    lower: Optional[float]
    torus_sq: float


def char_fn_sparse(t: float, mu: float, dist: DistSpec) -> CharFnValue:
    """φ(t) = 1 − μ + μ E cos(2πt ξ̄) with the two exponential bounds.

    ``upper = exp(−μ E‖tξ̄‖_T²)`` holds for all μ; ``lower =
    exp(−32 μ E‖tξ̄‖_T²)`` is reported only for μ < 1/4.
    """
    if not (0.0 < mu <= 1.0):
        raise ValueError("mu must lie in (0, 1]")
    if t == 0:
        return CharFnValue(1.0, 1.0, 1.0 if mu < 0.25 else None, 0.0)
    c = float(dist.mean_cos_sym(2.0 * np.pi * t))
    e = float(xi_sq_terms(t, dist))
    phi = 1.0 - mu + mu * c
    return CharFnValue(phi, float(np.exp(-mu * e)), float(np.exp(-32.0 * mu * e)) if mu < 0.25 else None, e)


def cosine_bounds_violations(grid_size: int = 100_000, lo: float = -2.0, hi: float = 2.0):
    """Grid points where 1 − 20‖a‖_T² ≤ cos 2πa ≤ 1 − ‖a‖_T² fails."""
    a = np.linspace(lo, hi, grid_size)
    f = _torus_sq(a)
    c = np.cos(2.0 * np.pi * a)
    bad = (1.0 - 20.0 * f > c) | (c > 1.0 - f)
    return a[bad]


def cosine_bounds_check(grid_size: int = 100_000) -> bool:
    return cosine_bounds_violations(grid_size).size == 0


# ---------------------------------------------------------------------------
# Fourier-side lemmas
# ---------------------------------------------------------------------------

def sample_tau(n2: int, nu: float, dist: DistSpec, seed: SeedLike, trials: int, symmetrize: bool = True):
    """Sparse vectors δ ⋆ ξ̄ (or δ ⋆ ξ) of length ``n2``."""
    rng = substream(seed)
    mask = rng.random((trials, n2)) < nu
    xi = sample_vector([dist] * n2, rng, trials)
    if symmetrize:
        xi = xi - sample_vector([dist] * n2, rng, trials)
    return mask * xi


def f1_f2_bound_eval(W, beta: float, nu: float, dist: DistSpec, trials: int = 100_000,
                     seed: SeedLike = 0, symmetrize: bool = True) -> dict:
    """Evaluate both sides of the two Fourier lemmas for one matrix ``W`` (2n × l).

    F1: L(Wᵀτ, β√l) ≤ 2 exp(2β²l − νm/2) γ_l(S_W(m)) for the best m.
    F2: sup_t γ_l(S_W(t)) e^{−32νt} ≤ P(‖Wᵀτ‖ ≤ β√l) + e^{−β²l} (ν < 1/4).

    τ has coordinates δ_j ξ̄_j, for which the characteristic function is
    exactly 1 − ν + ν E cos(2πs ξ̄).  Each check passes when the lower CI of
    its left side is at most the upper CI of its right side.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    n2, l = W.shape
    rng = substream(seed)
    tau = sample_tau(n2, nu, dist, rng, trials, symmetrize)
    Y = tau @ W
    radius = beta * np.sqrt(l)
    lev = levy_mc(Y, radius, trials)
    g = rng.standard_normal((trials, l)) / np.sqrt(2.0 * np.pi)
    q = np.sort(xi_norm_sq_batch(W, g, dist))
    frac = np.arange(1, trials + 1) / trials
    degenerate = not np.any(W)
    # F1: maximize F(m) e^{-νm/2} over jump points
    j1 = int(np.argmax(frac * np.exp(-nu * q / 2.0)))
    m_best = float(q[j1])
    _, gam_hi = wilson_interval(j1 + 1, trials)
    pref = 2.0 * np.exp(2.0 * beta**2 * l - nu * m_best / 2.0)
    f1_rhs = pref * frac[j1]
    f1_ok = lev.ci_low <= pref * gam_hi
    report = {
        "l": l, "beta": beta, "nu": nu, "trials": trials, "degenerate": degenerate,
        "levy": lev.value, "levy_ci": (lev.ci_low, lev.ci_high),
        "f1_m": m_best, "f1_rhs": f1_rhs, "f1_ok": bool(f1_ok),
    }
    if nu < 0.25:
        j2 = int(np.argmax(frac * np.exp(-32.0 * nu * q)))
        g_lo, _ = wilson_interval(j2 + 1, trials)
        lhs = frac[j2] * np.exp(-32.0 * nu * q[j2])
        k = int(np.sum(np.sum(Y * Y, axis=1) <= radius * radius))
        _, p_hi = wilson_interval(k, trials)
        tail = np.exp(-beta**2 * l)
        report.update({
            "f2_t": float(q[j2]), "f2_lhs": float(lhs), "f2_rhs": k / trials + tail,
            "f2_ok": bool(g_lo * np.exp(-32.0 * nu * q[j2]) <= p_hi + tail),
        })
    return report


# ---------------------------------------------------------------------------
# Paley-Zygmund and sparse Hanson-Wright
# ---------------------------------------------------------------------------

def prob_abs_sym_ge_one(dist: DistSpec) -> float:
    """P(|ξ̄| ≥ 1), exact."""
    if dist.is_discrete:
        y, p = dist.sym_atom_arrays()
        return float(p[np.abs(y) >= 1.0 - 1e-12].sum())
    if dist.kind == "gaussian":
        return float(2.0 * special.ndtr(-1.0 / np.sqrt(2.0)))
    if dist.kind == "uniform-symmetric":
        h = 2.0 * np.sqrt(3.0)
        return float(((h - 1.0) / h) ** 2)
    raise ValueError("no closed form for sparse laws with continuous base")


def paley_zygmund_check(dist: DistSpec) -> dict:
    p = prob_abs_sym_ge_one(dist)
    bound = (2.0 * dist.psi2) ** -4
    return {"dist": dist.describe(), "prob": p, "bound": bound, "ok": bool(p >= bound)}


def hanson_wright_probe(k: int, nu: float, beta_prime: float, dist: DistSpec, trials: int,
                        seed: SeedLike = 0, scale: float = 0.5, chunk: int = 20_000) -> dict:
    """Estimate P(‖Wᵀτ′‖ ≤ β′√k) for W = scale·(orthonormal 2k × k).

    With ``scale = 1/2`` the matrix meets ‖W‖_HS = √k/2 and ‖W‖ ≤ 2.
    """
    rng = substream(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((2 * k, k)))
    W = scale * Q
    hits = 0
    for s in range(0, trials, chunk):
        b = min(chunk, trials - s)
        tau = sample_phi_mu(2 * k, nu, dist, rng, b)
        hits += int(np.sum(np.linalg.norm(tau @ W, axis=1) <= beta_prime * np.sqrt(k)))
    lo, hi = wilson_interval(hits, trials)
    return {"k": k, "hits": hits, "trials": trials, "p": hits / trials, "ci": (lo, hi),
            "hs_norm": float(np.linalg.norm(W)), "op_norm": float(np.linalg.norm(W, 2))}


def inequality_suite(dists=None, hs_ks=(8, 16, 32), nu: float = 0.25, beta_prime: float = 0.12,
                     trials: int = 100_000, seed: int = 0) -> dict:
    """Paley-Zygmund constants and sparse Hanson-Wright decay.

    The decay check fits log P against k (zero counts use the Wilson upper
    bound) and requires a negative slope with P strictly decreasing.
    """
    if dists is None:
        dists = [make_dist(k) for k in ("rademacher", "gaussian", "uniform-symmetric")]
    pz = [paley_zygmund_check(d) for d in dists]
    base = dists[0]
    hs = [hanson_wright_probe(k, nu, beta_prime, base, trials, seed=(int(seed), k)) for k in hs_ks]
    logp = np.log([h["p"] if h["hits"] > 0 else h["ci"][1] for h in hs])
    slope = float(np.polyfit(np.asarray(hs_ks, dtype=float), logp, 1)[0]) if len(hs_ks) > 1 else float("nan")
    decreasing = bool(np.all(np.diff(logp) < 0))
    return {
        "paley_zygmund": pz,
        "hanson_wright": hs,
        "hs_log_slope": slope,
        "hs_ok": decreasing and slope < 0,
        "ok": all(p["ok"] for p in pz) and decreasing and slope < 0,
    }
