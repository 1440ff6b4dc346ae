"""Command-line driver: one JSON config per run, reproducible artifacts.

Usage:  qvigrid --config run.json [--output DIR] [--quiet]

Exit codes: 0 converged, 1 config/IO error, 2 solver non-convergence
(outputs are still written).  Primary outputs (solution.csv, report.json)
are byte-identical across reruns of the same config; manifest.json echoes
the config and records digests and wall-clock time.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, penalty, probe, qvi
from .grid import GridFunction, NodeSet, build_grid
from .intervention import CostFunction, separation_delta, intervention_operator
from .operators import ObstacleSide, OperatorSpec
from .presets import preset
from .solve import ObstacleProblem, solve_obstacle


class ConfigError(ValueError):
    pass


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing required config key '{key}' in '{where}'")
    return block[key]


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {p}: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("grid", "problem"):
        _require(cfg, key, "top level")
    return cfg


def _build_grid(cfg: dict):
    blk = cfg["grid"]
    return build_grid(_require(blk, "lo", "grid"), _require(blk, "hi", "grid"),
                      _require(blk, "m", "grid"))


def _build_spec(cfg: dict) -> OperatorSpec:
    blk = cfg.get("operator", {"kind": "laplace"})
    return OperatorSpec(kind=_require(blk, "kind", "operator"),
                        lam=float(blk.get("lambda", 1.0)),
                        Lam=float(blk.get("Lambda", 1.0)),
                        matrices=tuple(np.asarray(A) for A in blk.get("matrices") or ()))


def _resolve_field(entry, grid, base_dir: Path) -> GridFunction:
    if isinstance(entry, (int, float)):
        return GridFunction.constant(grid, float(entry))
    if isinstance(entry, str):
        path = Path(entry)
        if not path.is_absolute():
            path = base_dir / path
        if not path.is_file():
            raise ConfigError(f"field CSV not found: {path}")
        return GridFunction.from_csv(path, grid)
    raise ConfigError(f"cannot interpret field spec {entry!r} "
                      "(expected a number or a CSV path)")


def _problem_data(cfg: dict, grid, base_dir: Path) -> dict:
    blk = cfg["problem"]
    mode = _require(blk, "mode", "problem")
    if mode not in ("obstacle", "qvi", "penalized", "sweep"):
        raise ConfigError(f"unknown problem mode {mode!r}")
    data = {"mode": mode, "spec": _build_spec(cfg)}
    if "preset" in blk:
        data.update(preset(blk["preset"], grid))
        data["mode"] = mode
        if "operator" in cfg:
            data["spec"] = _build_spec(cfg)
    for key, target in (("obstacle", "obstacle"), ("f", "f"),
                        ("boundary", "boundary_data")):
        if key in blk:
            data[target] = _resolve_field(blk[key], grid, base_dir)
    if "cost" in blk:
        data["cost"] = CostFunction(
            _resolve_field(blk["cost"], grid, base_dir),
            semiconcavity_constant=float(blk.get("cost_semiconcavity", 0.0)),
            modulus_exponent=float(blk.get("cost_modulus_exponent", 1.0)))
    if "side" in blk:
        data["side"] = ObstacleSide(blk["side"])
    data.setdefault("f", GridFunction.zeros(grid))
    data.setdefault("boundary_data", GridFunction.zeros(grid))
    if mode == "penalized":
        pblk = _require(blk, "penalty", "problem")
        data["penalty"] = penalty.PenaltyFamily(
            kind=_require(pblk, "kind", "problem.penalty"),
            epsilon=float(_require(pblk, "epsilon", "problem.penalty")),
            cap_N=pblk.get("cap"))
    if mode == "sweep":
        sblk = blk.get("sweep", {})
        data["eps_list"] = sblk.get("eps_list", data.get("eps_list"))
        data["alpha"] = float(sblk.get("alpha", data.get("alpha", 0.5)))
        data["penalty_kind"] = sblk.get("kind", data.get("penalty_kind",
                                                         "piecewise_linear"))
        if not data["eps_list"]:
            raise ConfigError("missing required config key 'eps_list' in 'problem.sweep'")
    for required in {"obstacle": ("obstacle", "side"), "qvi": ("cost",),
                     "penalized": ("obstacle",), "sweep": ("obstacle",)}[mode]:
        if required not in data:
            raise ConfigError(f"missing required config key '{required}' in 'problem'")
    return data


def _run_probes(cfg: dict, grid, u: GridFunction, data: dict, report: dict):
    blk = cfg.get("probe", {})
    names = blk.get("probes", [])
    if not names:
        return
    seed = int(blk.get("seed", 0))
    modulus = probe.ModulusFamily(constant=float(blk.get("modulus_constant", 1.0)),
                                  exponent=float(blk.get("modulus_exponent", 1.0)))
    budget = int(blk.get("sample_budget", 2000))
    out = {}
    contact_tol = blk.get("contact_tol")
    if contact_tol is None:
        contact_tol = 10.0 * grid.h ** 2 * (1.0 + u.max_abs())
    if data["mode"] == "qvi":
        obstacle = intervention_operator(u, data["cost"])
        side = ObstacleSide.UPPER
    else:
        obstacle = data.get("obstacle")
        side = data.get("side", ObstacleSide.LOWER)
    contact = None
    if obstacle is not None:
        contact = probe.extract_contact_set(u, obstacle, side, contact_tol)
        if "contact" in names:
            out["contact"] = {"n_contact": len(contact.nodes),
                              "n_free_boundary": len(contact.free_boundary),
                              "tol": contact_tol}
    if "growth" in names and contact is not None and len(contact.nodes) > 0:
        out["growth"] = probe.growth_constant(u, obstacle, contact,
                                              modulus).to_json_dict()
    if "oscillation" in names and contact is not None and len(contact.nodes) >= 2:
        out["oscillation"] = probe.contact_oscillation(
            u, obstacle, contact, modulus, seed=seed).to_json_dict()
    if "semiconcavity" in names:
        target = obstacle if data["mode"] == "qvi" else u
        region = NodeSet.from_mask(grid, penalty.interior_margin_mask(grid)
                                   & grid.interior_mask)
        if len(region) > 0:
            out["semiconcavity"] = probe.semiconcavity_modulus(
                target, region, steps=(1, 2, 4),
                exponent=modulus.exponent).to_json_dict()
    if "holder" in names:
        H = probe.HessianField.from_function(
            u, mask=penalty.interior_margin_mask(grid) & grid.interior_mask)
        out["holder"] = {"alpha": float(blk.get("alpha", 0.5)),
                         "seminorm": probe.holder_seminorm(
                             H, float(blk.get("alpha", 0.5)), budget, seed=seed)}
    if "separation" in names and data["mode"] == "qvi":
        sep = separation_delta(u, data["cost"], contact_tol=contact_tol)
        out["separation"] = {"delta": sep.delta, "has_contact": sep.has_contact,
                             "n_contact": sep.n_contact}
    if out:
        report["probes"] = out


def _solver_opts(cfg: dict) -> dict:
    blk = cfg.get("solver", {})
    return {
        "tol": blk.get("tol"),
        "max_iter": blk.get("max_iter"),
        "outer_tol": blk.get("outer_tol"),
        "inner_tol": blk.get("inner_tol"),
        "max_outer": int(blk.get("max_outer", qvi.DEFAULT_MAX_OUTER)),
    }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(config_path, output_dir=None, quiet: bool = False) -> int:
    """Execute one configured pipeline; returns the process exit code."""
    t0 = time.monotonic()
    try:
        cfg = load_config(config_path)
        base_dir = Path(config_path).resolve().parent
        grid = _build_grid(cfg)
        data = _problem_data(cfg, grid, base_dir)
        out_dir = Path(output_dir or cfg.get("output", {}).get("dir", "out"))
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    opts = _solver_opts(cfg)
    report: dict = {"mode": data["mode"], "version": __version__}
    converged = True
    try:
        if data["mode"] == "obstacle":
            prob = ObstacleProblem(data["spec"], data["side"], data["obstacle"],
                                   data["f"], data["boundary_data"])
            u, rep = solve_obstacle(prob, tol=opts["tol"], max_iter=opts["max_iter"])
            report["solver"] = rep.to_json_dict()
            converged = rep.converged
        elif data["mode"] == "penalized":
            u, rep = penalty.solve_penalized(
                data["spec"], data["obstacle"], data["penalty"], data["f"],
                data["boundary_data"], tol=opts["tol"], max_iter=opts["max_iter"])
            report["solver"] = rep.to_json_dict()
            converged = rep.converged
        elif data["mode"] == "qvi":
            prob = qvi.QVIProblem(data["spec"], data["cost"], data["f"],
                                  data["boundary_data"])
            u, rep = qvi.solve_qvi(prob, outer_tol=opts["outer_tol"],
                                   inner_tol=opts["inner_tol"],
                                   max_outer=opts["max_outer"])
            report["qvi"] = rep.to_json_dict()
            tol_chk = opts["outer_tol"] or 1e-6 * data["cost"].phi.max_abs()
            report["check"] = qvi.check_qvi(u, prob, 10 * tol_chk).to_json_dict()
            converged = rep.converged
        else:  # sweep
            decay = penalty.epsilon_sweep(
                data["spec"], data["obstacle"], data["penalty_kind"],
                data["eps_list"], data["alpha"], f=data["f"],
                boundary_data=data["boundary_data"], tol=opts["tol"],
                sample_budget=int(cfg.get("probe", {}).get("sample_budget", 2000)),
                seed=int(cfg.get("probe", {}).get("seed", 0)))
            report["decay"] = decay.to_json_dict()
            u = decay.solutions[-1]
            converged = True
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    _run_probes(cfg, grid, u, data, report)

    out_dir.mkdir(parents=True, exist_ok=True)
    sol_path = out_dir / "solution.csv"
    rep_path = out_dir / "report.json"
    u.to_csv(sol_path)
    rep_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    outputs = [sol_path, rep_path]
    if data["mode"] == "sweep":
        sweep_path = out_dir / "sweep.csv"
        with open(sweep_path, "w") as fh:
            fh.write("epsilon,seminorm,iterations,beta_max\n")
            for pt in report["decay"]["points"]:
                fh.write(",".join(format(x, ".17g") for x in
                                  (pt["epsilon"], pt["seminorm"],
                                   pt["iterations"], pt["beta_max"])) + "\n")
        outputs.append(sweep_path)

    manifest = {
        "config": cfg,
        "version": __version__,
        "wall_clock_s": time.monotonic() - t0,
        "inputs": {str(config_path): _sha256(Path(config_path))},
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    if not quiet:
        print(f"wrote {', '.join(p.name for p in outputs)} to {out_dir}")
        if not converged:
            print("warning: solver did not converge", file=sys.stderr)
    return 0 if converged else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qvigrid",
        description="Grid solvers for obstacle problems and impulse-control "
                    "QVIs with free-boundary regularity probes.")
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--output", default=None, help="override the output directory")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)
    return run(args.config, output_dir=args.output, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
