import io as _io
import json
import subprocess
import sys

import pytest

from graphmcf.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_USAGE, _report, main
from graphmcf.compare import Check

SMALL = {
    "name": "small", "domain": {"type": "Ball", "rho": 1.0}, "L": 20.0, "eps": 0.05, "h": 0.02,
    "T": 0.02, "snap_dt": 0.005, "h_w": 0.05, "w_window": [-0.5, 5.5],
}


@pytest.fixture()
def small_cfg(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps(SMALL))
    return p


@pytest.fixture(scope="module")
def two_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("runs")
    cfg = d / "small.json"
    cfg.write_text(json.dumps(SMALL))
    codes = []
    for name, threads in (("a", "1"), ("b", "4")):
        env_code = subprocess.run(
            [sys.executable, "-m", "graphmcf", "run", "--scenario", str(cfg), "--out", str(d / name)],
            env={"MCF_THREADS": threads, "PATH": ""}, capture_output=True, text=True,
        )
        codes.append(env_code)
    return d, codes


def test_run_writes_every_sink(two_runs):
    d, codes = two_runs
    assert [c.returncode for c in codes] == [EXIT_OK, EXIT_OK]
    assert codes[0].stdout == ""  # nothing fails, nothing is printed
    names = {p.name for p in (d / "a").iterdir()}
    assert {"config.json", "monitors.csv", "checks.ndjson", "svg", "graph_00000.txt"} <= names
    recs = [json.loads(line) for line in (d / "a" / "checks.ndjson").read_text().splitlines()]
    assert all(r["pass"] for r in recs) and all(r["scenario"] == "small" for r in recs)
    assert any(p.suffix == ".svg" for p in (d / "a" / "svg").iterdir())


def test_runs_are_byte_identical_across_thread_counts(two_runs):
    d, _ = two_runs
    files = sorted(p.relative_to(d / "a") for p in (d / "a").rglob("*") if p.is_file())
    for f in files:
        assert (d / "a" / f).read_bytes() == (d / "b" / f).read_bytes(), f


def test_compare_and_render(two_runs, capsys):
    d, _ = two_runs
    assert main(["compare", "--runA", str(d / "a"), "--runB", str(d / "b")]) == EXIT_OK
    assert main(["render", "--run", str(d / "a"), "--times", "0,0.01", "--out", str(d / "pics")]) == EXIT_OK
    out = capsys.readouterr().out.split()
    assert len(out) >= 2 and all(p.endswith(".svg") for p in out)


def test_unknown_scenario_is_a_usage_error(capsys):
    assert main(["run", "--scenario", "teapot"]) == EXIT_USAGE
    assert "unknown scenario" in capsys.readouterr().err


def test_cfl_violating_dt_is_a_config_error(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({**SMALL, "dt": 0.01}))
    assert main(["run", "--scenario", str(p)]) == EXIT_CONFIG
    assert "dt=0.01" in capsys.readouterr().err


def test_argument_errors_exit_with_two(small_cfg):
    for argv in ([], ["run"], ["frobnicate"], ["run", "--scenario", str(small_cfg), "--h", "abc"],
                 ["render", "--run", ".", "--times", "a,b"]):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == EXIT_USAGE
    assert main(["run", "--scenario", str(small_cfg), "--checks", "nonsense"]) == EXIT_USAGE


def test_bad_thread_count(small_cfg, monkeypatch):
    monkeypatch.setenv("MCF_THREADS", "zero")
    assert main(["run", "--scenario", str(small_cfg), "--checks", "none"]) == EXIT_USAGE


def test_missing_run_directory(tmp_path):
    assert main(["compare", "--runA", str(tmp_path / "x"), "--runB", str(tmp_path / "y")]) == EXIT_USAGE
    assert main(["render", "--run", str(tmp_path / "x"), "--times", "0"]) == EXIT_USAGE


def test_failing_checks_are_printed_as_ndjson():
    buf = _io.StringIO()
    checks = [Check("holder", "s", 1.0, 2.0, True), Check("c1_monotone", "s", 1.2, 1.01, False)]
    assert _report(checks, buf) == EXIT_FAIL
    lines = buf.getvalue().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["name"] == "c1_monotone"
