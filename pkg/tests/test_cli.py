import json

import pytest

from cmslab import classical as cl
from cmslab import cli


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_verify_hecke(capsys):
    code, out = run(["verify", "--suite", "hecke", "--n", "3"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["passed"]
    assert any("degenerate affine Hecke" in r["identity"] for r in data["reports"])
    assert all(r["anchor"] for r in data["reports"])


def test_cost_guard_is_usage_error(capsys):
    code, out = run(["verify", "--suite", "hecke", "--n", "9"], capsys)
    assert code == 1
    assert "usage error" in out.err


def test_unknown_flag_and_suite(capsys):
    assert run(["verify", "--bogus"], capsys)[0] == 1
    assert run(["verify", "--suite", "nope"], capsys)[0] == 1
    assert run(["verify", "--tol", "-1"], capsys)[0] == 1


def test_verify_is_deterministic(capsys):
    argv = ["verify", "--suite", "unity,freezing,rmatrix", "--n", "3", "--seed", "7"]
    a = run(argv, capsys)[1].out
    b = run(argv, capsys)[1].out
    assert a == b


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suite": "freezing", "n": 5}))
    code, out = run(["verify", "--config", str(cfg), "--n", "4"], capsys)
    assert code == 0
    assert json.loads(out.out)["meta"]["n"] == 4
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(["verify", "--config", str(cfg)], capsys)[0] == 1


def test_flow_writes_outputs(tmp_path, capsys):
    code, out = run(["flow", "--n", "3", "--hams", "2,3", "--t", "0.5", "--step", "1e-3",
                     "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["summary"]["max_drift"]["H_2"] < 1e-9
    assert (tmp_path / "trajectory.csv").read_text().startswith("t,p_1")


def test_flow_from_initial_file(tmp_path, capsys):
    init = tmp_path / "x0.json"
    init.write_text(json.dumps({"p": [0.5, -0.5], "q": [0.0, 2.0]}))
    assert run(["flow", "--n", "2", "--init", str(init), "--t", "0.2"], capsys)[0] == 0
    assert run(["flow", "--n", "3", "--init", str(init)], capsys)[0] == 1


def test_collision_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise cl.CollisionError("particles 1 and 2 collide", None)

    monkeypatch.setattr(cl, "flow", boom)
    code, out = run(["flow", "--n", "3", "--out", str(tmp_path)], capsys)
    assert code == 3
    assert json.loads((tmp_path / "summary.json").read_text())["partial"] is True


def test_transport_fidelity_table(tmp_path, capsys):
    code, _ = run(["transport", "--n", "3", "--N", "2", "--freezing", "--t", "1", "--step", "1e-2",
                   "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = (tmp_path / "fidelity.csv").read_text().splitlines()
    assert rows[0] == "t,fidelity,error"
    assert float(rows[-1].split(",")[1]) == pytest.approx(1.0, abs=1e-10)


def test_rmatrix_and_freeze(tmp_path, capsys):
    assert run(["rmatrix", "--N", "2", "--out", str(tmp_path)], capsys)[0] == 0
    assert (tmp_path / "qybe_grid.csv").exists()
    assert run(["freeze", "--n", "3", "--N", "2", "--out", str(tmp_path)], capsys)[0] == 0
    assert (tmp_path / "spectra.csv").read_text().startswith("index,M_2,M_3")


def test_wkb_usage(capsys):
    assert run(["wkb", "--case", "nowhere"], capsys)[0] == 1
    assert run(["wkb", "--hbars", "0.1"], capsys)[0] == 1


def test_failing_assertion_exit_code(capsys, monkeypatch):
    from cmslab import suites
    from cmslab.reports import Report

    monkeypatch.setitem(suites.RUNNERS, "hs", lambda P: [Report("forced", "test", passed=False)])
    assert run(["verify", "--suite", "hs"], capsys)[0] == 2
