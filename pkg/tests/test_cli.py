"""The ``forge`` command line: listing, exit codes, reports and outputs."""

import json
import subprocess
import sys

import pytest

from koopman_forge import registry
from koopman_forge.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_has_anchors(capsys):
    code, out, _ = run_cli(capsys, "list")
    lines = out.splitlines()
    assert code == 0 and len(lines) >= 30
    assert "susy_algebra → Eq. 4.31 / C5" in lines
    assert "jacobi_bilinear → Eq. G4" in lines
    assert lines == sorted(lines)
    assert run_cli(capsys, "list")[1] == out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "koopman_forge.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "jacobi_bilinear" in proc.stdout


@pytest.mark.parametrize("argv", [["run", "--suite", "nope"], ["run"], ["bogus"], ["run", "--suite", "all", "--seed", "x"]])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2
    capsys.readouterr()


def test_unwritable_report_exit_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "run", "--suite", "charges", "--report", str(tmp_path / "missing" / "r.json"))
    assert code == 2 and "not writable" in err
    code, _, _ = run_cli(capsys, "run", "--suite", "charges", "--report", str(tmp_path))
    assert code == 2


@pytest.mark.parametrize("cfg", [
    "not json",
    json.dumps([1, 2]),
    json.dumps({"colour": "red"}),
    json.dumps({"dt": -1.0}),
    json.dumps({"ordering": "xy"}),
    json.dumps({"tolerances": {"susy_algebra": 1e-3}}),
    json.dumps({"tolerances": {"no_such_check": 1e-3}}),
])
def test_bad_config_exit_2(capsys, tmp_path, cfg):
    path = tmp_path / "c.json"
    path.write_text(cfg)
    code, _, err = run_cli(capsys, "run", "--suite", "charges", "--config", str(path))
    assert code == 2 and err.startswith("forge:")


def test_bad_env_seed_exit_2(capsys, monkeypatch):
    monkeypatch.setenv("FORGE_SEED", "abc")
    assert run_cli(capsys, "run", "--suite", "charges")[0] == 2


def test_charges_report_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli(capsys, "run", "--suite", "charges", "--report", str(a), "--quiet")[0] == 0
    assert run_cli(capsys, "run", "--suite", "charges", "--report", str(b), "--quiet")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    ids = [e["checkId"] for e in rep["checks"]]
    assert ids == sorted(ids) and len(ids) == len(registry.checks_for("charges"))
    for e in rep["checks"]:
        assert e["paperRef"] and e["status"] == "pass" and "elapsed" not in e
        assert e["maxError"] == "exact"
    assert rep["summary"]["allPassed"] and rep["seed"] == registry.SuiteConfig().seed


def test_progress_lines_and_timings(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run_cli(capsys, "run", "--suite", "algebra", "--report", str(path), "--timings")
    assert code == 0
    assert len(out.splitlines()) == len(registry.checks_for("algebra")) + 1
    assert all("elapsed" in e for e in json.loads(path.read_text())["checks"])


def test_seed_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5}))
    path = tmp_path / "r.json"
    monkeypatch.setenv("FORGE_SEED", "77")
    run_cli(capsys, "run", "--suite", "algebra", "--config", str(cfg), "--report", str(path), "--quiet")
    assert json.loads(path.read_text())["seed"] == 77
    run_cli(capsys, "run", "--suite", "algebra", "--seed", "9", "--report", str(path), "--quiet")
    rep = json.loads(path.read_text())
    assert rep["seed"] == 9 and rep["config"]["seed"] == 9
    monkeypatch.delenv("FORGE_SEED")
    run_cli(capsys, "run", "--suite", "algebra", "--config", str(cfg), "--report", str(path), "--quiet")
    assert json.loads(path.read_text())["seed"] == 5


@pytest.fixture(scope="module")
def det_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("det")
    code = main(["run", "--suite", "determinants", "--report", str(d / "r.json"), "--csv", str(d / "out"), "--quiet"])
    return code, d


def test_csv_and_figures(det_run):
    code, d = det_run
    assert code == 0
    assert (d / "out" / "det_refinement_pendulum.csv").read_text().startswith("dt,deviation")
    assert (d / "out" / "det_refinement_pendulum.png").stat().st_size > 0


def test_no_figures_and_failing_override(capsys, det_run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"det_causal_closed_form": 1e-12}}))
    out = tmp_path / "out"
    code, _, _ = run_cli(capsys, "run", "--suite", "determinants", "--config", str(cfg), "--report",
                         str(tmp_path / "r.json"), "--csv", str(out), "--no-figures", "--quiet")
    assert code == 1
    assert sorted(p.name for p in out.iterdir()) == ["det_refinement_pendulum.csv"]
    rep = {e["checkId"]: e for e in json.loads((tmp_path / "r.json").read_text())["checks"]}
    e = rep["det_causal_closed_form"]
    assert e["status"] == "fail" and e["tolerance"] == 1e-12
    assert e["details"]["default_tolerance"] > 0
    base = {x["checkId"]: x for x in json.loads((det_run[1] / "r.json").read_text())["checks"]}
    assert base["det_causal_closed_form"]["maxError"] == e["maxError"]
