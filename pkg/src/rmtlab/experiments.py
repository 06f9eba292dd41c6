"""Monte Carlo tail experiments for spectral statistics and structural checks.

Every tail experiment draws ``trials`` matrices in fixed-size chunks.  Chunk
``j`` uses the substream ``(seed, tag, j)`` so the sample set, and hence every
success count, is independent of how chunks are scheduled over threads.  All
grid points share the same samples, which makes each curve exactly monotone
in ε.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from ._rng import SeedLike, open_uniform, substream
from .arithmetic import LcdParams, rlogd_vector
from .config import ExperimentConfig
from .ensembles import (DistSpec, MatrixProfile, ZeroedOutSpec, make_dist, sample_h1,
                        sample_symmetric)
from .stats import Z95, wilson_interval

STATISTICS = ("gap", "min-gap", "kth-sv", "rect-sv", "deloc", "distance")
_TAGS = {name: 101 + j for j, name in enumerate(STATISTICS)}


@dataclass
class TailCurve:
    """Estimates of P(statistic ≤ ε·scale) on an ascending ε grid."""

    statistic_name: str
    eps_grid: np.ndarray
    successes: np.ndarray
    trials: int
    probs: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    scale: float
    predicted_exponent: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps_grid = np.asarray(self.eps_grid, dtype=float)
        if self.eps_grid.size and np.any(np.diff(self.eps_grid) <= 0):
            raise ValueError("eps_grid must be strictly increasing")
        if np.any((self.probs < 0) | (self.probs > 1)):
            raise ValueError("probabilities outside [0, 1]")

    @property
    def floor(self) -> float:
        """Resolution floor 10/trials."""
        return 10.0 / self.trials

    def is_monotone(self) -> bool:
        """Weakly increasing within CI slack."""
        if self.probs.size < 2:
            return True
        return bool(np.all(self.probs[1:] >= self.ci_lo[:-1] - (self.ci_hi[:-1] - self.probs[:-1])))

    @classmethod
    def from_counts(cls, name, eps, successes, trials, scale, **kw) -> "TailCurve":
        successes = np.asarray(successes, dtype=np.int64)
        if successes.size:
            lo, hi = wilson_interval(successes, trials)
        else:
            lo = hi = np.zeros(0)
        return cls(name, np.asarray(eps, dtype=float), successes, int(trials),
                   successes / float(trials), np.atleast_1d(lo), np.atleast_1d(hi), float(scale), **kw)


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    slope_ci: float
    fit_window: tuple
    r_squared: float
    points: int = 0


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def deloc_min_norm(vectors, eps_loc: float) -> np.ndarray:
    """min over |I| = ⌈ε n⌉ of ‖v_I‖ for each column of ``vectors``."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n = V.shape[0]
    m = max(1, int(np.ceil(eps_loc * n - 1e-9)))
    sq = np.partition(V * V, m - 1, axis=0)[:m]
    return np.sqrt(np.sum(sq, axis=0))


def distance_to_column_span(A, k: int, a) -> np.ndarray:
    """dist(a, span of the first n−k columns of A) for each row of ``a``."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    Q, _ = linalg.qr(A[:, : n - k], mode="full")
    P = Q[:, n - k:]
    return np.linalg.norm(np.atleast_2d(a) @ P, axis=1)


def statistic_scale(cfg: ExperimentConfig) -> float:
    s, n, k = cfg.statistic, cfg.n, cfg.k
    if s in ("gap", "min-gap"):
        return 1.0 / np.sqrt(n)
    if s == "kth-sv":
        return k / np.sqrt(n)
    if s == "rect-sv":
        return float(np.sqrt(cfg.N) - np.sqrt(n - 1))
    if s == "deloc":
        return 1.0
    return float(np.sqrt(k))


def predicted_exponent(cfg: ExperimentConfig) -> Optional[float]:
    """Exponent of the matching upper bound, when the bound names one."""
    s, k = cfg.statistic, cfg.k
    if s == "gap":
        return k * (k + 1) / 2.0
    if s == "distance":
        return float(k)
    if s == "rect-sv":
        return (1.0 - cfg.gamma) * (cfg.N - cfg.n + 1) - 1.0
    return None


def _eval_matrix(cfg: ExperimentConfig, A, rng, vlaw) -> np.ndarray:
    s, n, k = cfg.statistic, cfg.n, cfg.k
    if s == "gap":
        i = cfg.index
        lam = linalg.eigh(A, eigvals_only=True, driver="evd")
        return np.array([max(lam[i + k - 1] - lam[i - 1], 0.0)])
    if s == "min-gap":
        lam = linalg.eigh(A, eigvals_only=True, driver="evd")
        return np.array([max(float(np.min(lam[k - 1:] - lam[: n - k + 1])), 0.0)])
    if s == "kth-sv":
        lam = linalg.eigh(A, eigvals_only=True, driver="evd")
        return np.array([np.sort(np.abs(lam))[k - 1]])
    if s == "rect-sv":
        sv = linalg.svd(A[:, :n], compute_uv=False)
        return np.array([sv[-1]])
    if s == "deloc":
        _, V = linalg.eigh(A, driver="evd")
        return np.array([float(np.min(deloc_min_norm(V, cfg.eps_loc)))])
    # distance
    u = open_uniform(rng, (cfg.vector_per_matrix, n))
    u2 = open_uniform(rng, u.shape) if vlaw.kind == "sparse" else None
    a = vlaw.transform(u, u2)
    return distance_to_column_span(A, k, a)


def _chunk_values(cfg: ExperimentConfig, profile: MatrixProfile, vlaw, j: int, count: int) -> np.ndarray:
    rng = substream((cfg.seed, _TAGS[cfg.statistic]), j)
    out = []
    for _ in range(count):
        A = sample_symmetric(profile, rng)
        out.append(_eval_matrix(cfg, A, rng, vlaw))
    return np.concatenate(out)


def sample_statistic(cfg: ExperimentConfig, threads: Optional[int] = None) -> np.ndarray:
    """Raw statistic values (unnormalized) in deterministic chunk order."""
    if cfg.statistic not in STATISTICS:
        raise ValueError(f"invalid statistic {cfg.statistic!r}")
    profile = cfg.profile()
    vlaw = cfg.vector_law()
    T, c = cfg.trials, cfg.chunk
    jobs = [(j, min(c, T - j * c)) for j in range(-(-T // c))]
    threads = cfg.threads if threads is None else int(threads)
    if threads <= 1 or len(jobs) == 1:
        parts = [_chunk_values(cfg, profile, vlaw, j, cnt) for j, cnt in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda jc: _chunk_values(cfg, profile, vlaw, *jc), jobs))
    return np.concatenate(parts)


def run_tail_experiment(cfg: ExperimentConfig, threads: Optional[int] = None,
                        pointwise: bool = False) -> TailCurve:
    """Estimate P(statistic ≤ ε·scale) for every ε of the configured grid.

    For ``distance`` each matrix contributes ``vector.per_matrix`` draws of
    ``a``, and the curve's trial count is the number of (matrix, a) pairs.

    By default all grid points share one sample, so the curve is exactly
    monotone but its errors are strongly correlated along the grid.  With
    ``pointwise=True`` the sample is cut into disjoint equal blocks, one per
    grid point, which makes the per-point estimates independent (useful when
    counting how many points an oracle falls inside the CI).
    """
    eps = cfg.eps_grid()
    total = cfg.trials * (cfg.vector_per_matrix if cfg.statistic == "distance" else 1)
    per_point = total // max(1, eps.size) if pointwise else total
    if 10.0 / max(per_point, 1) > 0.5:
        raise ValueError("too few trials: the 10/trials floor leaves no tail window")
    scale = statistic_scale(cfg)
    raw = sample_statistic(cfg, threads) / scale
    pred = predicted_exponent(cfg)
    if pointwise:
        blocks = raw[: per_point * eps.size].reshape(eps.size, per_point)
        succ = np.sum(blocks <= eps[:, None], axis=1)
        return TailCurve.from_counts(cfg.statistic, eps, succ, per_point, scale, predicted_exponent=pred,
                                     meta={"pointwise": True})
    vals = np.sort(raw)
    succ = np.searchsorted(vals, eps, side="right")
    curve = TailCurve.from_counts(cfg.statistic, eps, succ, vals.size, scale, predicted_exponent=pred)
    if not curve.is_monotone():  # cannot happen with shared samples
        raise AssertionError("tail curve is not monotone in eps")
    return curve


def fit_exponent(curve: TailCurve, min_points: int = 4) -> ExponentFit:
    """Weighted least squares of log p on log ε over the tail window.

    The window keeps points with 10/trials ≤ p ≤ 0.5.  Weights are the
    inverse delta-method variances T·p/(1−p) of log p̂, and ``slope_ci`` is
    the matching 95% half-width.
    """
    p = np.asarray(curve.probs, dtype=float)
    T = curve.trials
    mask = (p >= 10.0 / T) & (p <= 0.5) & (p > 0)
    if int(mask.sum()) < min_points:
        raise ValueError(f"need at least {min_points} grid points inside the tail window")
    x = np.log(curve.eps_grid[mask])
    y = np.log(p[mask])
    w = T * p[mask] / (1.0 - p[mask])
    X = np.column_stack([np.ones_like(x), x])
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    resid = y - X @ beta
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(w * resid**2)) / ss_tot if ss_tot > 0 else 1.0
    eps_used = curve.eps_grid[mask]
    return ExponentFit(float(beta[1]), float(beta[0]), float(Z95 * np.sqrt(cov[1, 1])),
                       (float(eps_used[0]), float(eps_used[-1])), r2, int(mask.sum()))


def chi_oracle(curve: TailCurve, k: int) -> np.ndarray:
    """P(χ_k ≤ ε√k) on the curve's grid (the gaussian-a distance law)."""
    from scipy.stats import chi

    return chi.cdf(curve.eps_grid * np.sqrt(k), k)


# ---------------------------------------------------------------------------
# decoupling
# ---------------------------------------------------------------------------

def decoupling_check(n: int, k: int, d: int, dist: DistSpec, v, trials: int = 100_000,
                     seed: SeedLike = 0, nu: float = 0.5, radius: Optional[float] = None) -> dict:
    """Monte Carlo comparison of P_M(‖MX‖ ≤ 2r)² with P_H(A₁ ∩ A₂).

    ``M`` is the zeroed-out matrix with block H₁, ``X = v``, and ``H = [H₁ H₂]``
    with H₂ an independent copy.  The radius ``r`` defaults to m = n − k; a
    smaller value keeps small instances away from the trivial regime.
    """
    if n > 24 or d > 6:
        raise ValueError("decoupling check is meant for n <= 24 and d <= 6")
    spec = ZeroedOutSpec(n, k, d, nu=nu, base_profile=MatrixProfile.homogeneous(n, dist))
    m = spec.m
    r = float(m if radius is None else radius)
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValueError("v must have length n")
    x, y = v[:d], v[d:m]
    base = (int(seed),) if np.ndim(seed) == 0 else tuple(int(s) for s in seed)
    H1 = sample_h1(spec, base + (1,), trials)
    lhs_norm2 = np.sum((H1 @ x) ** 2, axis=1) + np.sum((y @ H1) ** 2, axis=1)
    lhs_count = int(np.sum(lhs_norm2 <= (2 * r) ** 2))
    if lhs_count < 10:
        raise ValueError("left side below the 10/trials floor")
    G1 = sample_h1(spec, base + (2,), trials)
    G2 = sample_h1(spec, base + (3,), trials)
    a1 = (np.sum((G1 @ x) ** 2, axis=1) <= (2 * r) ** 2) & (np.sum((G2 @ x) ** 2, axis=1) <= (2 * r) ** 2)
    a2 = np.sum((y @ G1) ** 2, axis=1) + np.sum((y @ G2) ** 2, axis=1) <= (4 * r) ** 2
    rhs_count = int(np.sum(a1 & a2))
    p = lhs_count / trials
    plo, phi = wilson_interval(lhs_count, trials)
    q = rhs_count / trials
    qlo, qhi = wilson_interval(rhs_count, trials)
    width = max(phi**2 - plo**2, qhi - qlo)
    return {
        "lhs": p, "lhs_ci": (plo, phi), "lhs_sq": p * p, "lhs_sq_ci": (plo**2, phi**2),
        "rhs": q, "rhs_ci": (qlo, qhi), "ci_width": width, "radius": r, "trials": trials,
        "ok": bool(p * p <= q + 3.0 * width),
    }


# ---------------------------------------------------------------------------
# structured box vectors
# ---------------------------------------------------------------------------

def _annulus_values(N: int, kappa: float) -> np.ndarray:
    hi = int(np.floor(kappa * N))
    pos = np.arange(N, hi + 1)
    return np.concatenate([-pos[::-1], pos])


def box_rlogd_experiment(N: int, kappa: float, d, dist: DistSpec, K, trials: int = 1000,
                         seed: SeedLike = 0, L: float = 1.0, alpha: float = 0.5,
                         n: Optional[int] = None, c0: float = 1.0, ratio: float = 1.001,
                         exhaustive: bool = False) -> dict:
    """Fraction of box points X with log-RLCD(r_n·X) ≤ K.

    ``X`` is uniform on the annulus product ``([−κN, −N] ∪ [N, κN])ᵈ`` and
    ``r_n = c₀/(32√n)`` (``n`` defaults to ``d``).  ``K`` may be a sequence;
    the scan runs once up to ``max(K)`` and every threshold reads the same
    witnesses, so fractions are monotone in ``K``.  A sequence of ``d``
    values adds a log-fraction slope in ``d``.  With ``exhaustive`` every
    box point is evaluated instead of sampling.
    """
    if np.ndim(d):
        reps = [box_rlogd_experiment(N, kappa, int(dd), dist, K, trials, seed, L, alpha, n, c0,
                                     ratio, exhaustive) for dd in d]
        ds = np.array([int(dd) for dd in d], dtype=float)
        fr = np.array([r["fraction"] if np.ndim(r["fraction"]) == 0 else r["fraction"][-1] for r in reps])
        slope = None
        if np.all(fr > 0) and ds.size >= 2:
            slope = float(np.polyfit(ds, np.log(fr), 1)[0])
        return {"by_d": reps, "log_fraction_slope": slope,
                "decreasing": slope is not None and slope <= 0}
    d = int(d)
    if not (1 <= d <= 16):
        raise ValueError("d must lie in [1, 16]")
    Ks = np.atleast_1d(np.asarray(K, dtype=float))
    if np.any(Ks <= 0):
        raise ValueError("K must be positive")
    vals = _annulus_values(N, kappa)
    if exhaustive:
        if vals.size**d > 10**6:
            raise ValueError("box too large for exhaustive enumeration")
        X = np.array(np.meshgrid(*([vals] * d), indexing="ij")).reshape(d, -1).T
    else:
        rng = substream(seed, 0xB0C)
        X = vals[rng.integers(0, vals.size, size=(trials, d))]
    rn = c0 / (32.0 * np.sqrt(n if n is not None else d))
    params = LcdParams(L=L, alpha=alpha, theta_max=float(Ks.max()), ratio=ratio)
    his = np.array([rlogd_vector(rn * row, params, dist).hi for row in X])
    counts = np.array([int(np.sum(his <= kk)) for kk in Ks])
    lo, hi = wilson_interval(counts, X.shape[0])
    frac = counts / X.shape[0]
    scalar = np.ndim(K) == 0
    return {
        "d": d, "K": float(Ks[0]) if scalar else Ks.tolist(),
        "fraction": float(frac[0]) if scalar else frac,
        "ci": (float(np.atleast_1d(lo)[0]), float(np.atleast_1d(hi)[0])) if scalar else (lo, hi),
        "points": X.shape[0], "exhaustive": exhaustive, "r_n": rn,
    }


# ---------------------------------------------------------------------------
# interlacing chain
# ---------------------------------------------------------------------------

def interlace_gap_chain_check(n: int, k: int, trials: int = 1000, dist: Optional[DistSpec] = None,
                              eps: float = 1.0, c: float = 0.3, i: Optional[int] = None,
                              seed: SeedLike = 0, matrices: Optional[Sequence] = None) -> dict:
    """Re-check, sample by sample, the steps from a small gap to small |vⱼᵀX|.

    With ``A = [[A', X], [Xᵀ, a]]``, ``u = (w, b)`` the unit eigenvector of
    ``λ_i(A)`` and ``v_j`` the eigenvectors of ``λ_{i+j−1}(A')``:

    * ``|b||vⱼᵀX| ≤ |λ_{i+j−1}(A') − λ_i(A)|`` (always);
    * interlacing puts ``λ_{i+j−1}(A')`` in ``[λ_i(A), λ_{i+k}(A)]``;
    * under ``λ_{i+k} − λ_i ≤ ε/√n`` and ``|b| ≥ c/√n`` this gives
      ``|vⱼᵀX| ≤ ε/c``.

    Trials where a hypothesis fails are counted as skips, not failures.
    """
    if n < k + 2:
        raise ValueError("need n >= k + 2")
    i = max(1, n // 2) if i is None else int(i)
    if not (1 <= i <= n - k):
        raise ValueError("need 1 <= i <= n - k")
    if matrices is None:
        prof = MatrixProfile.homogeneous(n, dist if dist is not None else make_dist("gaussian"))
        rng = substream(seed, 0x1A7)
        matrices = (sample_symmetric(prof, rng) for _ in range(trials))
    rep = {"trials": 0, "identity_fail": 0, "interlace_fail": 0, "gap_hyp": 0, "b_hyp": 0,
           "tested": 0, "hypothesis_skip": 0, "conclusion_fail": 0}
    for A in matrices:
        A = np.asarray(A, dtype=float)
        rep["trials"] += 1
        lam, U = linalg.eigh(A, driver="evd")
        Ap, X = A[:-1, :-1], A[:-1, -1]
        mu, V = linalg.eigh(Ap, driver="evd")
        tol = 1e-9 * max(1.0, float(np.max(np.abs(lam))))
        b = U[-1, i - 1]
        li = lam[i - 1]
        proj = np.abs(V[:, i - 1: i - 1 + k].T @ X)
        diffs = np.abs(mu[i - 1: i - 1 + k] - li)
        if np.any(abs(b) * proj > diffs + tol * (1 + np.linalg.norm(X))):
            rep["identity_fail"] += 1
        if np.any(mu[i - 1: i - 1 + k] < li - tol) or np.any(mu[i - 1: i - 1 + k] > lam[i - 1 + k] + tol):
            rep["interlace_fail"] += 1
        gap_ok = lam[i - 1 + k] - li <= eps / np.sqrt(n)
        b_ok = abs(b) >= c / np.sqrt(n)
        rep["gap_hyp"] += int(gap_ok)
        rep["b_hyp"] += int(b_ok)
        if gap_ok and b_ok:
            rep["tested"] += 1
            if np.any(proj > eps / c + tol * (1 + np.linalg.norm(X))):
                rep["conclusion_fail"] += 1
        else:
            rep["hypothesis_skip"] += 1
    rep["ok"] = rep["identity_fail"] == rep["interlace_fail"] == rep["conclusion_fail"] == 0
    return rep
