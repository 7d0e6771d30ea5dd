import json

import pytest

from app.cli import apply_override, load_config, main
from app.utils.errors import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, ConfigurationError


def test_print_config_applies_overrides(capsys, tmp_path):
    code = main(["simulate", "--out", str(tmp_path), "--print-config",
                 "--set", "params.alpha=2", "--set", "solver.grid.N=1000", "--seed", "7"])
    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["params"]["alpha"] == 2
    assert printed["solver"]["params"]["alpha"] == 2
    assert printed["solver"]["grid"]["N"] == 1000
    assert printed["solver"]["seed"] == 7
    assert not (tmp_path / "manifest.json").exists()


def test_override_without_equals_is_a_config_error():
    with pytest.raises(ConfigurationError):
        apply_override({}, "solver.T")
    assert main(["simulate", "--set", "solver.T", "--print-config"]) == EXIT_CONFIG


def test_apply_override_builds_nested_keys():
    data = {"solver": {"T": 1}}
    apply_override(data, "solver.grid.L=50")
    apply_override(data, "out=runs/a")
    assert data == {"solver": {"T": 1, "grid": {"L": 50}}, "out": "runs/a"}


def test_invalid_grid_exits_with_config_code(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path), "--set", "solver.grid.N=4"])
    assert code == EXIT_CONFIG
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "ConfigurationError"
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "ConfigurationError"


def test_cfl_violation_exits_with_config_code(tmp_path):
    code = main(["simulate", "--out", str(tmp_path), "--set", "solver.dt=5"])
    assert code == EXIT_CONFIG
    record = json.loads((tmp_path / "error.json").read_text())
    assert record["details"]["dt"] == 5


def test_front_reaching_boundary_exits_with_numerical_code(tmp_path):
    code = main(["simulate", "--out", str(tmp_path),
                 "--set", "solver.grid.L=10", "--set", "solver.grid.N=200", "--set", "solver.T=30"])
    assert code == EXIT_NUMERICAL
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "BoundaryApproachError"


def test_orbit_below_unit_speed_is_rejected(tmp_path):
    assert main(["orbit", "--out", str(tmp_path), "--set", "orbit.c=0.5"]) == EXIT_CONFIG


def test_config_file_then_flags(tmp_path):
    path = tmp_path / "critical.json"
    path.write_text(json.dumps({"critical": {"samples": 801, "ag": {"start": 0.01, "stop": 0.1, "num": 3}},
                                "workers": 4}))
    cfg = load_config("critical-curve", path, ["critical.ag.num=5"], workers=1)
    assert cfg.kind.value == "critical-curve"
    assert cfg.critical.samples == 801
    assert cfg.critical.ag.num == 5
    assert cfg.workers == 1


def test_unreadable_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config("simulate", tmp_path / "missing.json")


def test_critical_curve_command_writes_manifest(tmp_path):
    code = main(["critical-curve", "--out", str(tmp_path),
                 "--set", "critical.ag.start=0.01", "--set", "critical.ag.stop=0.1",
                 "--set", "critical.ag.num=3", "--set", "critical.samples=801"])
    assert code == EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["kind"] == "critical-curve"
    assert "critical_curve.csv" in manifest["files"]


def test_negative_sweep_alpha_exits_with_config_code(tmp_path):
    code = main(["sweep-speeds", "--out", str(tmp_path), "--set", "sweep.alpha.start=-1", "--set", "sweep.alpha.stop=1", "--set", "sweep.alpha.num=2"])
    assert code == EXIT_CONFIG
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "ConfigurationError"


def test_solver_params_alone_are_adopted():
    cfg = load_config("simulate", overrides=["solver.params.alpha=2", "solver.seed=5"])
    assert cfg.params.alpha == 2
    assert cfg.solver.params.alpha == 2
    assert cfg.seed == 5


def test_conflicting_params_exit_with_config_code(tmp_path):
    code = main(["simulate", "--out", str(tmp_path), "--print-config",
                 "--set", "params.alpha=2", "--set", "solver.params.alpha=3"])
    assert code == EXIT_CONFIG
    with pytest.raises(ConfigurationError):
        load_config("simulate", overrides=["solver.seed=1"], seed=2)


def test_unwritable_error_record_is_logged(tmp_path, caplog):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    code = main(["simulate", "--out", str(blocker), "--set", "solver.grid.N=4"])
    assert code == EXIT_CONFIG
    assert any("could not write error.json" in r.getMessage() for r in caplog.records)
