import json
import subprocess
import sys
from pathlib import Path

import pytest

from horoboundary.cli import main
from horoboundary.report import Report, emit_report

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"


def run(tmp_path, config, *extra):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config) if not isinstance(config, str) else config)
    out = tmp_path / "report.out"
    code = main(["--config", str(cfg), "--out", str(out), *extra])
    return code, (out.read_bytes() if out.exists() else b"")


def test_ladder_atlas_example(tmp_path):
    code, data = run(tmp_path, {"space": {"kind": "ladder"}, "analysis": "atlas", "seed": 7})
    assert code == 0
    rep = json.loads(data)
    assert rep["results"]["atlas"]["cluster_count"] == 5
    assert rep["status"] == "pass"


def test_ladder_atlas_golden(tmp_path):
    code, data = run(tmp_path, json.loads((CONFIGS / "ladder_atlas.json").read_text()))
    assert code == 0
    assert data == (GOLDEN / "ladder_atlas.json").read_bytes()


def test_identity_julia_example(tmp_path):
    code, data = run(tmp_path, {"space": {"kind": "poincare_disc"}, "map": {"rule": "identity"},
                                "analysis": "julia", "R": 2})
    assert code == 0
    assert json.loads(data)["results"]["julia"]["radii"][0]["violations"] == 0


def test_rays_on_graph_is_a_capability_error(tmp_path, capsys):
    code, data = run(tmp_path, json.loads((CONFIGS / "triangle_rays.json").read_text()))
    assert code == 3 and data == b""
    assert "no geodesic rays" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    code, _ = run(tmp_path, '{"space": {"kind": "ladder"},\n "analysis": atlas}')
    assert code == 3
    err = capsys.readouterr().err
    assert "line 2" in err and "column 14" in err


@pytest.mark.parametrize("config", [
    {"space": {"kind": "torus"}, "analysis": "delta"},
    {"space": {"kind": "ladder"}, "analysis": "spectrum"},
    {"space": {"kind": "ladder"}, "analysis": "delta", "seed": -1},
    {"space": {"kind": "ladder"}, "map": {"rule": "mobius_disc"}, "analysis": "dynamics"},
    {"space": {"kind": "ladder"}, "analysis": "dynamics"},
    {"space": {"kind": "poincare_disc"}, "analysis": "rays", "p": [2, 0]},
    {"space": {"kind": "ladder"}, "analysis": "delta", "tolerances": {"speed": 1}},
])
def test_configuration_errors(tmp_path, config):
    assert run(tmp_path, config)[0] == 3


def test_failing_check_exits_one(tmp_path):
    code, data = run(tmp_path, {"space": "ladder", "analysis": "atlas", "expect_clusters": 4})
    assert code == 1 and json.loads(data)["status"] == "fail"


def test_inconclusive_exits_two(tmp_path):
    code, data = run(tmp_path, {"space": "poincare_disc", "analysis": "rays", "q": [0, 0.9],
                                "horizon": 3})
    rep = json.loads(data)
    assert code == 2 and rep["status"] == "inconclusive" and rep["inconclusive"]


def test_reports_are_byte_identical(tmp_path):
    config = json.loads((CONFIGS / "ladder_suite.json").read_text())
    first = run(tmp_path, config)
    second = run(tmp_path, config)
    assert first == second and first[0] == 0


def test_seed_flag_overrides_config(tmp_path):
    config = {"space": "poincare_disc", "analysis": "delta", "n": 200, "seed": 1}
    _, a = run(tmp_path, config, "--seed", "5")
    _, b = run(tmp_path, dict(config, seed=5))
    _, c = run(tmp_path, config)
    assert a == b != c


def test_ladder_dynamics_fields(tmp_path):
    code, data = run(tmp_path, json.loads((CONFIGS / "ladder_f1_dynamics.json").read_text()))
    dyn = json.loads(data)["results"]["dynamics"]
    assert code == 0
    assert dyn["c_estimate"] == 1.0 and dyn["dilation_log"] == -1.0 and dyn["tau_upper"] == 1.0


def test_csv_output(tmp_path):
    code, data = run(tmp_path, json.loads((CONFIGS / "tree_delta.json").read_text()),
                     "--format", "csv")
    lines = data.decode().splitlines()
    assert code == 0 and lines[0] == "key,value"
    assert "results.delta.value,0.0" in lines


def test_empty_report_is_valid():
    rep = json.loads(emit_report(Report()))
    assert rep["checks"] == [] and rep["results"] == {} and rep["status"] == "pass"
    assert emit_report(Report(), "csv").startswith(b"key,value\n")


def test_canonical_floats():
    rep = Report(results={"x": 0.1 + 0.2, "big": float("inf"), "nan": float("nan"), "z": 1 + 2j})
    data = json.loads(emit_report(rep))
    assert data["results"] == {"x": 0.3, "big": "inf", "nan": "nan", "z": [1.0, 2.0]}


@pytest.mark.parametrize("name", sorted(p.stem for p in CONFIGS.glob("*.json")))
def test_shipped_configs_parse(name):
    from horoboundary.cli import load_config
    from horoboundary.maps import load_map
    from horoboundary.spaces import load_space
    cfg = load_config(CONFIGS / f"{name}.json")
    space = load_space(cfg.space)
    if cfg.map:
        load_map(space, cfg.map)


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "horoboundary", "--config",
                           str(CONFIGS / "tree_delta.json"), "--out", str(out)])
    assert proc.returncode == 0 and json.loads(out.read_text())["status"] == "pass"
