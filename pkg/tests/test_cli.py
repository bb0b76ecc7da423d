import json

import numpy as np
import pytest

from nhflows import cli
from nhflows.cli import EXIT_ERROR, EXIT_FAIL, main
from nhflows.scenarios import REGISTRY, Check, ScenarioResult, clear_cache


@pytest.fixture(autouse=True)
def fresh_cache():
    clear_cache()
    yield
    clear_cache()


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_shows_every_scenario_once(capsys):
    code, out, _ = run(["list"], capsys)
    assert code == 0
    names = [line.split()[0] for line in out.splitlines() if not line.startswith(" ")]
    assert sorted(names) == sorted(REGISTRY)
    assert len(names) == len(set(names))
    assert "veselova_n" in names and "spherical_support" in names
    assert out.count("verifies:") == len(REGISTRY)


def test_run_writes_csv_and_report(tmp_path, capsys):
    code, out, _ = run(["run", "--scenario", "suslov", "--t-final", "1", "--output", str(tmp_path)], capsys)
    assert code == 0
    assert "PASS  suslov" in out
    report = json.loads((tmp_path / "suslov_report.json").read_text())
    assert report["pass"] is True and report["scenario"] == "suslov"
    assert report["provenance"]["config"]["integrator"]["t_final"] == 1.0
    assert report["provenance"]["seed"] == 42
    for name in report["artifacts"]:
        csv = tmp_path / name
        header = csv.read_text().splitlines()[0].split(",")
        assert header[0] == "t"
        data = np.loadtxt(csv, delimiter=",", skiprows=1)
        assert data.shape[1] == len(header)
        assert data[-1, 0] == pytest.approx(1.0)
    assert {c["name"] for c in report["checks"]} >= {"energy_drift", "constraints_drift"}


def test_run_from_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "suslov", "params": {"n": 3, "r": 1, "I": [1.0, 2.0, 3.0]},
                               "integrator": {"t_final": 1.0}, "output": {"dir": str(tmp_path / "o"),
                                                                          "csv": False}}))
    code, _, _ = run(["run", "--config", str(cfg)], capsys)
    assert code == 0
    assert [p.name for p in (tmp_path / "o").iterdir()] == ["suslov_report.json"]


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "suslov", "params": {"n": 4, "r": 1, "I": [4.0, 3.0, 2.0, 1.0]},
                               "integrator": {"t_final": 5.0, "dt": 0.001}, "seed": 1}))
    code, _, _ = run(["run", "--config", str(cfg), "--t-final", "0.5", "--dt", "0.01", "--seed", "9",
                      "--output", str(tmp_path)], capsys)
    assert code == 0
    prov = json.loads((tmp_path / "suslov_report.json").read_text())["provenance"]
    assert prov["config"]["integrator"]["t_final"] == 0.5
    assert prov["config"]["integrator"]["dt"] == 0.01
    assert prov["seed"] == 9


def test_missing_required_key_in_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "veselova_n", "params": {}}))
    code, _, err = run(["run", "--config", str(cfg), "--output", str(tmp_path)], capsys)
    assert code == EXIT_ERROR
    assert "params.A" in err
    assert not list(tmp_path.glob("*_report.json"))


@pytest.mark.parametrize("args,fragment", [
    (["run"], "scenario"),
    (["run", "--scenario", "nope"], "unknown scenario"),
    (["run", "--config", "/nonexistent.json"], "cannot read"),
])
def test_error_exit_code(args, fragment, capsys):
    code, _, err = run(args, capsys)
    assert code == EXIT_ERROR
    assert err.startswith("error:") and fragment in err


def test_unknown_key_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "suslov", "params": {"n": 3, "r": 1, "I": [1.0, 2.0, 3.0]},
                               "integrator": {"tfinal": 1.0}}))
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code == EXIT_ERROR and "integrator.tfinal" in err


def test_failing_check_exit_code(tmp_path, capsys, monkeypatch):
    def fake(name, raw, strict_required=False):
        from nhflows.config import resolve_config
        cfg = resolve_config(raw, {}, (), strict_required)
        cfg["scenario"] = name
        return cfg, ScenarioResult(name, [Check("x", 2.0, 1.0)])

    monkeypatch.setattr(cli, "run_scenario", fake)
    code, out, _ = run(["run", "--scenario", "suslov", "--output", str(tmp_path)], capsys)
    assert code == EXIT_FAIL
    assert "FAIL  x" in out
    assert json.loads((tmp_path / "suslov_report.json").read_text())["pass"] is False


def _strip(report):
    report["provenance"]["created"] = None
    report["checks"] = [c for c in report["checks"] if c["category"] != "runtime"]
    return report


def test_runs_are_deterministic(tmp_path, capsys):
    reports, files = [], []
    for _ in range(2):
        clear_cache()
        code, _, _ = run(["run", "--scenario", "veselova3", "--t-final", "2", "--output", str(tmp_path)], capsys)
        assert code == 0
        report = json.loads((tmp_path / "veselova3_report.json").read_text())
        reports.append(report)
        files.append({name: (tmp_path / name).read_bytes() for name in report["artifacts"]})
    assert _strip(reports[0]) == _strip(reports[1])
    assert files[0] == files[1] and files[0]
