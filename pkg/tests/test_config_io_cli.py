import json
import os

import numpy as np
import pytest

from rmtlab import io as rio
from rmtlab.cli import run
from rmtlab.config import (
    ConfigError,
    ExperimentConfig,
    config_from_flat,
    config_to_text,
    load_config,
    parse_config_text,
)
from rmtlab.experiments import ExponentFit, TailCurve, fit_exponent

CONFIG = """\
# small gap run
experiment = gap-tail
seed = 7
n = 12
trials = 300
ensemble.dist = rademacher
grid.lo = 0.1
grid.hi = 2.0
"""


# ---- config ----------------------------------------------------------------------

def test_parse_config_text():
    items = parse_config_text(CONFIG)
    assert items["ensemble.dist"] == "rademacher"
    cfg = config_from_flat(items)
    assert cfg.n == 12 and cfg.seed == 7 and cfg.statistic == "gap"
    assert cfg.index == 6


@pytest.mark.parametrize("text", [
    "experiment = gap-tail\nseed = 1\nn = 5\nbogus = 3\n",
    "experiment = gap-tail\nn = 5\n",
    "experiment = gap-tail\nseed = 1\nn = 5\nn = 6\n",
    "experiment = gap-tail\nseed = 1\nn = 5\na.b.c = 1\n",
    "experiment = gap-tail\nseed = x\nn = 5\n",
    "experiment = gap-tail\nseed = 1\nn = 5\nensemble.dist = cauchy\n",
    "experiment = gap-tail\nseed = 1\nn = 5\ni = 5\n",
    "experiment = nope\nseed = 1\nn = 5\n",
    "experiment = gap-tail\nseed = 1\nn = 5\njust words\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        config_from_flat(parse_config_text(text))


def test_config_round_trip(tmp_path):
    cfg = config_from_flat(parse_config_text(CONFIG)).with_overrides(grid_points=(0.1, 0.3), threads=4)
    path = tmp_path / "c.cfg"
    path.write_text(config_to_text(cfg))
    back = load_config(str(path))
    assert back.to_flat() == cfg.to_flat()
    assert "threads" not in cfg.to_flat()


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "none.cfg"))


# ---- output files -----------------------------------------------------------------

def _empty_curve():
    return TailCurve.from_counts("gap", [], [], 100, 1.0)


def test_empty_curve_outputs():
    c = _empty_curve()
    assert rio.curve_to_csv(c) == ",".join(rio.CSV_COLUMNS) + "\n"
    data = json.loads(rio.dumps(rio.curve_summary(c)))
    assert data["rows"] == [] and data["fit"] is None
    assert "<svg" in rio.curve_to_svg(c)


def test_csv_and_svg_shapes():
    eps = np.geomspace(0.05, 0.8, 8)
    probs = np.minimum(1.0, eps**2)
    c = TailCurve.from_counts("gap", eps, np.rint(probs * 10**6), 10**6, 0.5, predicted_exponent=1.0)
    csv = rio.curve_to_csv(c)
    assert csv.count("\n") == 9 and "\r" not in csv
    fit = fit_exponent(c)
    svg = rio.curve_to_svg(c, fit)
    assert svg.count("<polyline") == 2
    assert 'class="fit"' in svg and 'class="predicted"' in svg
    c.predicted_exponent = None
    assert rio.curve_to_svg(c, fit).count("<polyline") == 1


def test_fmt_round_trips_doubles():
    x = 0.1 + 0.2
    assert float(rio.fmt(x)) == x


def test_jsonable_handles_numpy_and_infinity():
    out = rio._jsonable({"a": np.int64(3), "b": np.array([1.5, np.inf]), "c": np.bool_(True)})
    assert out == {"a": 3, "b": [1.5, "inf"], "c": True}


def test_atomic_write_cleans_up_on_error(tmp_path, monkeypatch):
    target = tmp_path / "out.txt"

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        rio.atomic_write(str(target), "hello")
    assert list(tmp_path.iterdir()) == []


def test_write_all_rolls_back(tmp_path):
    good = tmp_path / "a.csv"
    bad = tmp_path / "missing" / "b.csv"
    with pytest.raises(OSError):
        rio.write_all({str(good): "x\n", str(bad): "y\n"})
    assert not good.exists()


def test_version_string_shape():
    v = rio.version_string()
    assert v.startswith("v0.1.0")


# ---- CLI ---------------------------------------------------------------------------

def test_cli_verify_cosine(capsys):
    assert run(["verify", "--suite", "cosine"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] and out["suites"] == {"cosine": True}


def test_cli_unknown_suite():
    assert run(["verify", "--suite", "nonsense"]) == 2


def test_cli_missing_config(tmp_path):
    assert run(["gap-tail", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_cli_bogus_subcommand():
    assert run(["frobnicate"]) == 2


def test_cli_missing_seed():
    assert run(["gap-tail", "--n", "8"]) == 2


def test_cli_unwritable_output(tmp_path):
    assert run(["gap-tail", "--n", "8", "--seed", "1", "--trials", "50",
                "--csv", str(tmp_path / "no" / "dir" / "x.csv")]) == 2


def test_cli_bad_thread_env(monkeypatch):
    monkeypatch.setenv("RMTLAB_THREADS", "zero")
    assert run(["gap-tail", "--n", "8", "--seed", "1", "--trials", "50"]) == 2


def test_cli_tail_outputs_and_report(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG)
    prefix = str(tmp_path / "r")
    assert run(["gap-tail", "--config", str(cfg), "--out", prefix, "--svg", prefix + ".svg"]) == 0
    line = json.loads(capsys.readouterr().out)
    assert line["statistic"] == "gap" and "wall_time_s" in line
    summary = json.loads((tmp_path / "r.json").read_text())
    assert summary["config"]["seed"] == 7 and "threads" not in summary["config"]
    assert "output.csv" not in summary["config"]
    csv2 = str(tmp_path / "again.csv")
    cfg2 = str(tmp_path / "again.cfg")
    assert run(["report", "--json", prefix + ".json", "--csv", csv2, "--config-out", cfg2]) == 0
    assert open(csv2).read() == (tmp_path / "r.csv").read_text()
    assert load_config(cfg2).to_flat() == summary["config"]


def test_cli_rlogd_vector(tmp_path, capsys):
    p = tmp_path / "v.csv"
    p.write_text("1.0\n")
    assert run(["rlogd", "--vector", str(p), "--L", "0.1", "--alpha", "0.5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lo"] <= 0.43744471 <= out["hi"]


def test_cli_threshold(tmp_path, capsys):
    p = tmp_path / "v.csv"
    p.write_text(",".join(["0.5"] * 4) + "\n")
    assert run(["threshold", "--vector", str(p), "--k", "1", "--d", "1", "--trials", "500", "--seed", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lo"] <= out["estimate"] <= out["hi"]


@pytest.mark.parametrize("cmd,extra", [
    ("gap-tail", []),
    ("sv-tail", ["--k", "2"]),
    ("rect-sv", ["--N", "12"]),
    ("deloc", []),
    ("distance", ["--k", "2", "--per-matrix", "4"]),
    ("gap-tail", ["--min-gap", "--k", "2"]),
])
def test_cli_reruns_are_byte_identical(tmp_path, monkeypatch, cmd, extra):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("RMTLAB_THREADS", threads)
        prefix = str(tmp_path / f"t{threads}")
        args = [cmd, "--n", "10", "--seed", "5", "--trials", "200", "--chunk", "16", "--out", prefix] + extra
        assert run(args) == 0
        outs.append((open(prefix + ".csv", "rb").read(), open(prefix + ".json", "rb").read()))
    assert outs[0] == outs[1]
