"""Experiment configuration: a flat ``key = value`` format with dotted sections.

Example::

    experiment = gap-tail
    seed = 7
    n = 200
    trials = 10000
    ensemble.dist = gaussian
    grid.lo = 0.05
    grid.hi = 0.5
    grid.ratio = 1.2

Lines starting with ``#`` are comments.  Unknown keys are rejected and the
seed is mandatory.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .ensembles import DistSpec, MatrixProfile, parse_dist

EXPERIMENTS = {
    "gap-tail": "gap",
    "min-gap-tail": "min-gap",
    "sv-tail": "kth-sv",
    "rect-sv": "rect-sv",
    "deloc": "deloc",
    "distance": "distance",
}


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a tail experiment's output.

    ``threads`` and the output paths affect scheduling and file placement
    only, so they are left out of :meth:`to_flat` (the echoed config).
    """

    experiment: str
    seed: int
    n: int
    k: int = 1
    i: Optional[int] = None
    N: Optional[int] = None
    eps_loc: float = 0.1
    gamma: float = 0.0
    trials: int = 10_000
    chunk: int = 256
    ensemble_dist: str = "gaussian"
    ensemble_pattern: str = "homogeneous"
    ensemble_scales: Optional[tuple] = None
    ensemble_bandwidth: int = 1
    ensemble_zone_seed: int = 0
    ensemble_center_z: float = 0.0
    vector_dist: str = "gaussian"
    vector_per_matrix: int = 1
    grid_lo: float = 0.02
    grid_hi: float = 0.8
    grid_ratio: float = 1.5
    grid_points: Optional[tuple] = None
    threads: int = 1
    output_csv: Optional[str] = None
    output_json: Optional[str] = None
    output_svg: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        for name in ("n", "k", "trials", "chunk", "vector_per_matrix", "threads", "ensemble_bandwidth"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        stat = self.statistic
        n, k = self.n, self.k
        if stat == "gap":
            if not (1 <= self.index <= n - k):
                raise ConfigError("gap needs 1 <= i <= n - k")
        elif stat == "min-gap":
            if not (2 <= k <= n):
                raise ConfigError("min-gap needs 2 <= k <= n")
        elif stat == "kth-sv":
            if k > n:
                raise ConfigError("kth-sv needs k <= n")
        elif stat == "rect-sv":
            if self.N is None or self.N < n:
                raise ConfigError("rect-sv needs N >= n")
        elif stat == "deloc":
            if not (0 < self.eps_loc < 1):
                raise ConfigError("eps_loc must lie in (0, 1)")
        elif stat == "distance":
            if not k < n:
                raise ConfigError("distance needs k < n")
        if not (0 <= self.gamma < 1):
            raise ConfigError("gamma must lie in [0, 1)")
        if self.grid_points is not None:
            g = np.asarray(self.grid_points, dtype=float)
            if g.size and (np.any(g <= 0) or np.any(np.diff(g) <= 0)):
                raise ConfigError("grid.points must be positive and strictly increasing")
        elif not (0 < self.grid_lo <= self.grid_hi and self.grid_ratio > 1):
            raise ConfigError("need 0 < grid.lo <= grid.hi and grid.ratio > 1")
        try:
            self.profile()
            parse_dist(self.vector_dist)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc

    # ---- derived ---------------------------------------------------------
    @property
    def statistic(self) -> str:
        return EXPERIMENTS[self.experiment]

    @property
    def index(self) -> int:
        """1-based eigenvalue index (default ⌊n/2⌋)."""
        return self.i if self.i is not None else max(1, self.n // 2)

    @property
    def matrix_dim(self) -> int:
        return self.N if self.statistic == "rect-sv" else self.n

    def eps_grid(self) -> np.ndarray:
        if self.grid_points is not None:
            return np.asarray(self.grid_points, dtype=float)
        m = int(np.floor(np.log(self.grid_hi / self.grid_lo) / np.log(self.grid_ratio) + 1e-9))
        return self.grid_lo * self.grid_ratio ** np.arange(m + 1)

    def zone_dists(self) -> list:
        return [parse_dist(s.strip()) for s in self.ensemble_dist.split("|")]

    def profile(self) -> MatrixProfile:
        dists = self.zone_dists()
        n = self.matrix_dim
        cz = self.ensemble_center_z or None
        if self.ensemble_pattern == "homogeneous":
            if len(dists) != 1:
                raise ConfigError("homogeneous ensemble takes one distribution")
            sc = self.ensemble_scales[0] if self.ensemble_scales else 1.0
            return MatrixProfile.homogeneous(n, dists[0], center_z=cz, scale=sc)
        return MatrixProfile.zoned(n, dists, pattern=self.ensemble_pattern, scales=self.ensemble_scales,
                                   bandwidth=self.ensemble_bandwidth, seed=self.ensemble_zone_seed,
                                   center_z=cz)

    def vector_law(self) -> DistSpec:
        return parse_dist(self.vector_dist)

    # ---- flat form -------------------------------------------------------
    def to_flat(self) -> dict:
        """Dotted-key dict of every result-determining field."""
        out = {}
        for f in fields(self):
            if f.name == "threads" or f.name.startswith("output_"):
                continue
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, tuple):
                val = list(val)
            out[_dotted(f.name)] = val
        return out

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


_SECTIONS = ("ensemble", "vector", "grid", "output")
_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_TUPLE_FIELDS = {"ensemble_scales", "grid_points"}


def _dotted(name: str) -> str:
    for s in _SECTIONS:
        if name.startswith(s + "_"):
            return s + "." + name[len(s) + 1:]
    return name


def _field_name(key: str) -> str:
    return key.replace(".", "_") if "." in key else key


def _coerce(name: str, value):
    ftype = str(_FIELDS[name].type)
    if name in _TUPLE_FIELDS:
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return tuple(float(v) for v in value)
    if isinstance(value, str):
        value = value.strip()
    if "int" in ftype:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name} must be an integer")
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be an integer, got {value!r}") from None
    if "float" in ftype:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be a number, got {value!r}") from None
    return str(value)


def config_from_flat(items: dict) -> ExperimentConfig:
    """Build a config from dotted keys; unknown keys and a missing seed are errors."""
    kw = {}
    for key, value in items.items():
        name = _field_name(key)
        if name not in _FIELDS or _dotted(name) != key:
            raise ConfigError(f"unknown config key {key!r}")
        kw[name] = _coerce(name, value)
    for req in ("experiment", "seed", "n"):
        if req not in kw:
            raise ConfigError(f"missing required key {req!r}")
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config_text(text: str) -> dict:
    items: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.count(".") > 1:
            raise ConfigError(f"line {lineno}: only one level of sections is allowed")
        if key in items:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        items[key] = value
    return items


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    return config_from_flat(parse_config_text(text))


def config_to_text(cfg: ExperimentConfig) -> str:
    lines = []
    for key, val in cfg.to_flat().items():
        if isinstance(val, list):
            val = ",".join(repr(float(v)) for v in val)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"
