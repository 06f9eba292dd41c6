"""Hard-invariant suites behind ``rmtlab verify``.

Each suite returns a dict with at least ``name``, ``cases``, ``failures`` and
``ok``.  Sizes default to the acceptance settings; every suite is seeded.
"""
from __future__ import annotations

import numpy as np

from ._rng import substream
from .arithmetic import level_set_containment_check, torus_norm, xi_norm_sq_batch, _gaussian_theta
from .ensembles import MatrixProfile, make_dist, parse_dist, sample_symmetric
from .experiments import decoupling_check
from .geometry import DecompParams, is_compressible, spread_count
from .smallball import cosine_bounds_violations, paley_zygmund_check
from .spectral import interlacing_check, restricted_column_select

BUILTIN = ("rademacher", "gaussian", "uniform-symmetric")


def _report(name, cases, failures, **extra):
    out = {"name": name, "cases": int(cases), "failures": int(failures), "ok": failures == 0}
    out.update(extra)
    return out


def suite_cosine(grid_size: int = 100_000, seed: int = 0) -> dict:
    bad = cosine_bounds_violations(grid_size)
    return _report("cosine", grid_size, bad.size)


def suite_containment(pairs: int = 10_000, seed: int = 0) -> dict:
    """S(t) − S(t) ⊆ S(4t) over a few random W, laws and levels."""
    rng = substream(seed, 0xC0)
    per = max(1, pairs // 4)
    cases = fails = 0
    for j, kind in enumerate(("rademacher", "gaussian", "uniform-symmetric", "sparse:rademacher:0.3")):
        dist = parse_dist(kind)
        l = 2 + j % 3
        W = rng.standard_normal((6, l))
        # level at the 30% quantile keeps the acceptance rate reasonable
        q = xi_norm_sq_batch(W, _gaussian_theta(rng, 4000, l), dist)
        t = float(np.quantile(q, 0.3))
        c, f = level_set_containment_check(W, t, dist, pairs=per, seed=(seed, j))
        cases += c
        fails += f
    return _report("containment", cases, fails)


def suite_interlacing(count: int = 10_000, seed: int = 0) -> dict:
    rng = substream(seed, 0x11)
    fails = 0
    kinds = BUILTIN + ("sparse",)
    for j in range(count):
        n = int(rng.integers(2, 31))
        kind = kinds[j % len(kinds)]
        dist = make_dist(kind) if kind != "sparse" else make_dist("sparse", {"base": make_dist("rademacher"), "mu": 0.2})
        A = sample_symmetric(MatrixProfile.homogeneous(n, dist), rng)
        fails += not interlacing_check(A)
    return _report("interlacing", count, fails)


def suite_paley_zygmund(seed: int = 0) -> dict:
    rows = [paley_zygmund_check(make_dist(k)) for k in BUILTIN]
    rows.append(paley_zygmund_check(make_dist("discrete", {"atoms": [(-2.0, 1 / 3), (1.0, 2 / 3)]})))
    return _report("paley-zygmund", len(rows), sum(not r["ok"] for r in rows), rows=rows)


def suite_torus(count: int = 100_000, seed: int = 0) -> dict:
    """‖x + z‖_T = ‖x‖_T for integer z: exact on dyadic inputs, 1e-12 otherwise."""
    rng = substream(seed, 0x70)
    n = 4
    x = rng.uniform(-50, 50, size=(count, n))
    dyadic = np.arange(count) % 2 == 0
    x[dyadic] = np.round(x[dyadic] * 2**20) / 2**20
    z = rng.integers(-1000, 1001, size=(count, n)).astype(float)
    a = np.array([torus_norm(r) for r in x])
    b = np.array([torus_norm(r) for r in x + z])
    err = np.abs(a - b)
    fails = int(np.sum(err[dyadic] != 0) + np.sum(err[~dyadic] > 1e-12))
    return _report("torus", count, fails, max_err=float(err.max()))


def _incompressible_candidates(rng, n):
    mode = rng.integers(0, 3)
    if mode == 0:
        x = rng.standard_normal(n)
    elif mode == 1:
        # a few spikes on top of a flat background, near the compressible boundary
        x = rng.uniform(0.05, 1.0) * rng.standard_normal(n)
        s = max(1, int(rng.integers(1, max(2, n // 8))))
        x[rng.choice(n, s, replace=False)] += rng.uniform(1.0, 5.0, s) * np.sqrt(n / s)
    else:
        x = np.zeros(n)
        s = int(rng.integers(max(1, n // 5), n + 1))
        x[rng.choice(n, s, replace=False)] = rng.choice([-1.0, 1.0], s) * rng.uniform(0.5, 1.5, s)
    return x / np.linalg.norm(x)


def suite_spread(count: int = 10_000, seed: int = 0, params: DecompParams = DecompParams()) -> dict:
    rng = substream(seed, 0x5D)
    done = fails = 0
    while done < count:
        n = int(rng.integers(16, 201))
        x = _incompressible_candidates(rng, n)
        if is_compressible(x, params):
            continue
        done += 1
        fails += spread_count(x, params) < params.rho**2 * params.delta * n / 2
    return _report("spread", count, fails)


def suite_decoupling(instances: int = 20, trials: int = 20_000, seed: int = 0) -> dict:
    """Seeded small zeroed-out instances with a mid-range radius."""
    rng = substream(seed, 0xDC)
    rows = []
    for j in range(instances):
        n = int(rng.integers(6, 13))
        k = int(rng.integers(0, 3))
        d = int(rng.integers(1, min(6, n - k - 1) + 1))
        nu = float(rng.choice([0.25, 0.5, 1.0]))
        kind = BUILTIN[j % 3]
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        m = n - k
        ex = nu * ((m - d) * np.sum(v[:d] ** 2) + d * np.sum(v[d:m] ** 2))
        r = 0.5 * np.sqrt(ex) if ex > 0 else 1.0
        rep = decoupling_check(n, k, d, make_dist(kind), v, trials, seed=(seed, j), nu=nu, radius=r)
        rep.update(n=n, k=k, d=d, nu=nu, dist=kind)
        rows.append(rep)
    return _report("decoupling", instances, sum(not r["ok"] for r in rows), rows=rows)


def suite_restricted(instances: int = 200, seed: int = 0, constant: float = 3.0,
                     max_fail_rate: float = 0.01) -> dict:
    rng = substream(seed, 0x71)
    fails = 0
    worst = 0.0
    for _ in range(instances):
        k = int(rng.integers(2, 6))
        d = int(rng.integers(k, 10))
        l = int(rng.integers(1, k))
        W = rng.standard_normal((k, d)) * rng.uniform(0.2, 3.0, size=(1, d))
        sel = restricted_column_select(W, l, mode="exhaustive")
        worst = max(worst, sel.ratio)
        fails += sel.ratio > constant
    rate = fails / instances
    out = _report("restricted", instances, fails, worst_ratio=worst, fail_rate=rate)
    out["ok"] = rate <= max_fail_rate
    return out


SUITES = {
    "cosine": suite_cosine,
    "containment": suite_containment,
    "interlacing": suite_interlacing,
    "paley-zygmund": suite_paley_zygmund,
    "torus": suite_torus,
    "spread": suite_spread,
    "decoupling": suite_decoupling,
    "restricted": suite_restricted,
}
