"""Result files: tail-curve CSV, JSON summaries and log-log SVG plots.

Numbers are written with 17 significant digits and LF line endings so equal
results give byte-identical files.  Every write goes to a temporary file in
the target directory and is renamed into place.
"""
from __future__ import annotations

import json
import os
import subprocess
import tempfile
from typing import Optional

import numpy as np

CSV_COLUMNS = ("eps", "scale", "successes", "trials", "p_hat", "ci_lo", "ci_hi")
PACKAGE_VERSION = "0.1.0"


def fmt(x) -> str:
    return "%.17g" % float(x)


def curve_to_csv(curve) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for j in range(len(curve.eps_grid)):
        lines.append(",".join([
            fmt(curve.eps_grid[j]), fmt(curve.scale), str(int(curve.successes[j])), str(int(curve.trials)),
            fmt(curve.probs[j]), fmt(curve.ci_lo[j]), fmt(curve.ci_hi[j]),
        ]))
    return "\n".join(lines) + "\n"


def version_string() -> str:
    """``v0.1.0`` plus ``-g<hash>`` when run from a git checkout."""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=here, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"v{PACKAGE_VERSION}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{PACKAGE_VERSION}"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def curve_summary(curve, fit=None, config: Optional[dict] = None) -> dict:
    rows = [dict(zip(CSV_COLUMNS, (float(curve.eps_grid[j]), float(curve.scale), int(curve.successes[j]),
                                   int(curve.trials), float(curve.probs[j]), float(curve.ci_lo[j]),
                                   float(curve.ci_hi[j]))))
            for j in range(len(curve.eps_grid))]
    fit_d = None
    if fit is not None:
        fit_d = {"slope": fit.slope, "intercept": fit.intercept, "slope_ci": fit.slope_ci,
                 "fit_window": list(fit.fit_window), "r_squared": fit.r_squared, "points": fit.points}
    return {
        "version": version_string(),
        "config": config or {},
        "statistic": curve.statistic_name,
        "predicted_exponent": curve.predicted_exponent,
        "rows": rows,
        "fit": fit_d,
    }


def _polyline(pts, cls, color, dash=""):
    coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline class="{cls}" fill="none" stroke="{color}" stroke-width="1.5"{extra} points="{coords}"/>'


def curve_to_svg(curve, fit=None, width: int = 480, height: int = 360) -> str:
    """Log-log plot: data points, the fitted line and the predicted-slope line.

    The two lines are the only ``<polyline>`` elements; the predicted one
    is drawn when the curve carries a predicted exponent, anchored at the
    fit's left end.
    """
    pad = 48
    mask = curve.probs > 0
    eps = curve.eps_grid[mask]
    p = curve.probs[mask]
    lx = np.log10(eps) if eps.size else np.array([-1.0, 0.0])
    ly = np.log10(p) if p.size else np.array([-3.0, 0.0])
    x0, x1 = float(lx.min()), float(lx.max())
    y0, y1 = float(min(ly.min(), -0.01)), 0.0
    if x1 - x0 < 1e-9:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-9:
        y0 -= 1.0

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (min(max(v, y0), y1) - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">log10 eps</text>',
        f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 {height / 2:.1f})" '
        f'text-anchor="middle">log10 P</text>',
        f'<text x="{pad}" y="{pad - 8}" font-size="12">{curve.statistic_name}</text>',
    ]
    for a, b in zip(lx, ly):
        parts.append(f'<circle cx="{sx(a):.3f}" cy="{sy(b):.3f}" r="3" fill="#1f77b4"/>')
    if fit is not None:
        xa, xb = np.log10(fit.fit_window[0]), np.log10(fit.fit_window[1])
        line = [(sx(v), sy((fit.intercept + fit.slope * v * np.log(10)) / np.log(10))) for v in (xa, xb)]
        parts.append(_polyline(line, "fit", "#d62728"))
        if curve.predicted_exponent is not None:
            ya = (fit.intercept + fit.slope * xa * np.log(10)) / np.log(10)
            pred = [(sx(v), sy(ya + curve.predicted_exponent * (v - xa))) for v in (xa, xb)]
            parts.append(_polyline(pred, "predicted", "#2ca02c", dash="5,4"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename.

    On any error the temporary file is removed and the exception re-raised.
    """
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_all(files: dict) -> list:
    """Write ``{path: text}``; if any write fails, remove the ones already written."""
    done = []
    try:
        for path, text in files.items():
            atomic_write(path, text)
            done.append(path)
    except BaseException:
        for path in done:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return done
