import csv

import numpy as np
import pytest

from stagger.cli import main
from stagger.harness.experiment import RunTrace
from stagger.harness.io import ConfigError, TRACE_COLUMNS, parse_config, read_traces, write_traces

CONFIG = """\
# tiny smoke run
num_dim=2
num_rounds=3
methods=sts,random   # two methods
functions=sphere,ackley
repeats=2
seed=42
"""


def test_parse_config():
    cfg = parse_config(CONFIG)
    assert cfg.num_dim == 2 and cfg.methods == ("sts", "random") and cfg.functions == ("sphere", "ackley")
    assert cfg.repeats == 2 and cfg.seed == 42 and cfg.distort


@pytest.mark.parametrize("text", ["num_dim=2\nbogus=1", "num_dim", "num_dim=two", "methods=nope", "num_dim=0"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_trace_roundtrip(tmp_path):
    traces = [RunTrace("a", "f", 0, np.array([0.1, 1 / 3]), np.array([1e-3, 2e-3])),
              RunTrace("b", "f", 0, np.array([0.2, 0.2]), np.array([0.0, 0.0]))]
    path = tmp_path / "t.csv"
    write_traces(traces, path)
    back = read_traces(path)
    assert [t.method for t in back] == ["a", "b"]
    assert np.array_equal(back[0].best_so_far, traces[0].best_so_far)


def test_run_and_score(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(CONFIG)
    traces, scores, svg = tmp_path / "t.csv", tmp_path / "s.csv", tmp_path / "b.svg"
    assert main(["run", str(cfg), "--traces", str(traces), "--scores", str(scores), "--svg", str(svg)]) == 0
    rows = list(csv.reader(traces.open()))
    assert tuple(rows[0]) == TRACE_COLUMNS and len(rows) == 1 + 2 * 2 * 2 * 3
    assert [r[0] for r in rows[1:4]] == ["sts"] * 3
    assert svg.read_text().lstrip().startswith("<?xml")
    first = scores.read_text()
    assert main(["score", str(traces), "--scores", str(scores)]) == 0
    assert scores.read_text() == first
    assert "score=" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", str(cfg), "--traces", str(a), "--scores", str(tmp_path / "s.csv")])
    main(["run", str(cfg), "--traces", str(b), "--scores", str(tmp_path / "s.csv")])
    strip = lambda p: [r[:5] for r in csv.reader(p.open())]
    assert strip(a) == strip(b)


def test_config_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("methods=cma\n")
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1


def test_runtime_failure_exit_2(tmp_path, monkeypatch):
    import stagger.harness.experiment as exp

    real = exp.fit
    monkeypatch.setattr(exp, "fit", lambda data, **kw: (_ for _ in ()).throw(RuntimeError("x")) if data.n else real(data))
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("num_dim=1\nnum_rounds=2\nmethods=sts,random\n")
    assert main(["run", str(cfg), "--traces", str(tmp_path / "t.csv"), "--scores", str(tmp_path / "s.csv")]) == 2


def test_sweep_and_ablate(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("num_dim=2\nnum_rounds=2\n")
    out = dict(traces=str(tmp_path / "t.csv"), scores=str(tmp_path / "s.csv"))
    assert main(["sweep-m", str(cfg), "--m", "0,3", "--traces", out["traces"], "--scores", out["scores"]]) == 0
    assert [r[0] for r in csv.reader(open(out["scores"]))][1:] == ["sts:M=0", "sts:M=3"]
    assert main(["ablate", str(cfg), "--traces", out["traces"], "--scores", out["scores"]]) == 0


def test_diagnose(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["diagnose", "--samplers", "sts,sobol", "--seeds", "1", "--rounds", "2", "--dim", "2",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4 and {"rmse", "std_p_max", "duration"} <= set(rows[0])
    assert "rmse=" in capsys.readouterr().out
