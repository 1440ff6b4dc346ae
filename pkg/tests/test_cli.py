import json

import numpy as np
import pytest

import qvigrid as q
from qvigrid.cli import main, run


def _write(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def _base_cfg(out):
    return {
        "grid": {"lo": [-1.0], "hi": [1.0], "m": [101]},
        "problem": {"mode": "obstacle", "preset": "oracle1d"},
        "output": {"dir": str(out)},
    }


def test_obstacle_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, _base_cfg(out))
    assert run(cfg, quiet=True) == 0
    assert (out / "solution.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["solver"]["converged"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["problem"]["preset"] == "oracle1d"
    assert set(manifest["outputs"]) == {"solution.csv", "report.json"}
    assert manifest["wall_clock_s"] > 0
    g = q.build_grid([-1.0], [1.0], [101])
    u = q.GridFunction.from_csv(out / "solution.csv", g)
    assert u.values[50] == pytest.approx(0.5, abs=1e-6)


def test_rerun_is_byte_identical(tmp_path):
    cfg_dict = _base_cfg(tmp_path / "a")
    cfg_dict["probe"] = {"probes": ["contact", "growth", "semiconcavity"],
                         "seed": 0}
    cfg = _write(tmp_path, cfg_dict)
    assert run(cfg, quiet=True) == 0
    cfg_dict["output"]["dir"] = str(tmp_path / "b")
    cfg = _write(tmp_path, cfg_dict)
    assert run(cfg, quiet=True) == 0
    for name in ("solution.csv", "report.json"):
        assert ((tmp_path / "a" / name).read_bytes()
                == (tmp_path / "b" / name).read_bytes())


def test_missing_config_and_keys(tmp_path, capsys):
    assert run(tmp_path / "nope.json", quiet=True) == 1
    assert "not found" in capsys.readouterr().err
    cfg = _write(tmp_path, {"grid": {"lo": [-1], "hi": [1], "m": [11]}})
    assert run(cfg, quiet=True) == 1
    assert "problem" in capsys.readouterr().err
    cfg = _write(tmp_path, {"grid": {"lo": [-1], "hi": [1]},
                            "problem": {"mode": "obstacle"}})
    assert run(cfg, quiet=True) == 1
    assert "'m'" in capsys.readouterr().err


def test_unknown_preset_and_mode(tmp_path, capsys):
    base = _base_cfg(tmp_path / "o")
    base["problem"]["preset"] = "oracle9d"
    assert run(_write(tmp_path, base), quiet=True) == 1
    err = capsys.readouterr().err
    assert "oracle9d" in err and "oracle1d" in err  # lists what exists
    base["problem"]["preset"] = "oracle1d"
    base["problem"]["mode"] = "waffle"
    assert run(_write(tmp_path, base), quiet=True) == 1


def test_invalid_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(p, quiet=True) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_nonconvergence_exit_code_still_writes(tmp_path):
    out = tmp_path / "out"
    cfg_dict = _base_cfg(out)
    cfg_dict["solver"] = {"max_iter": 3}
    cfg = _write(tmp_path, cfg_dict)
    assert run(cfg, quiet=True) == 2
    assert (out / "solution.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert not report["solver"]["converged"]


def test_qvi_mode_with_probes(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {
        "grid": {"lo": [-1.0], "hi": [1.0], "m": [101]},
        "problem": {"mode": "qvi", "preset": "classical01"},
        "probe": {"probes": ["separation", "semiconcavity"], "seed": 0},
        "output": {"dir": str(out)},
    })
    assert run(cfg, quiet=True) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["qvi"]["converged"]
    assert report["check"]["ok"]
    assert report["probes"]["separation"]["delta"] > 0


def test_sweep_mode_writes_sweep_csv(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {
        "grid": {"lo": [-1.0], "hi": [1.0], "m": [201]},
        "problem": {"mode": "sweep", "preset": "penalty_decay"},
        "output": {"dir": str(out)},
    })
    assert run(cfg, quiet=True) == 0
    report = json.loads((out / "report.json").read_text())
    assert -0.8 <= report["decay"]["slope"] <= -0.2
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "epsilon,seminorm,iterations,beta_max"
    assert len(lines) == 5


def test_field_from_csv_and_number(tmp_path):
    g = q.build_grid([-1.0], [1.0], [51])
    obstacle = q.GridFunction.from_callable(g, lambda x: 0.3 - x ** 2)
    obstacle.to_csv(tmp_path / "obstacle.csv")
    out = tmp_path / "out"
    cfg = _write(tmp_path, {
        "grid": {"lo": [-1.0], "hi": [1.0], "m": [51]},
        "problem": {"mode": "obstacle", "side": "lower",
                    "obstacle": "obstacle.csv", "f": 0.0, "boundary": 0.0},
        "output": {"dir": str(out)},
    })
    assert run(cfg, quiet=True) == 0
    u = q.GridFunction.from_csv(out / "solution.csv", g)
    assert np.all(u.values[g.interior_mask]
                  >= obstacle.values[g.interior_mask] - 1e-12)


def test_main_entry_point(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = _write(tmp_path, _base_cfg(tmp_path / "ignored"))
    assert main(["--config", str(cfg), "--output", str(out)]) == 0
    assert "solution.csv" in capsys.readouterr().out
    assert (out / "solution.csv").exists()
