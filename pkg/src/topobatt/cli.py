"""Command-line surface: reproducible runs from JSON configs to CSV/JSON.

Subcommands: bound-states, dynamics, sweep, zeno, greens, boundaries.
Every output file gets a sibling ``<name>.manifest.json`` recording the
command, config snapshot, tolerances and timing. Floats are written with
17 significant digits so identical runs produce byte-identical CSV.

Exit codes: 0 success, 2 config error, 3 solver error, 4 precondition
(light-cone / on-spectrum) error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, PreconditionError, SolverError, TopobattError
from .model import ModelConfig, validate
from .bath import greens_function_finite, build_finite_lattice, greens_function_with_error
from .dynamics import evolve_finite, stroboscopic_samples  # noqa: F401  (re-export for scripts)
from .resolvent import find_coherent_bse, find_dissipative_poles
from .thermo import indicator_series
from .phases import (
    boundary_curves,
    default_jobs,
    max_ergotropy_sweep,
    mse_sweep,
)
from .zeno import coherent_pair_E0, kappa_qze, max_power_vs_kappa

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_PRECONDITION = 4


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(out_path: Path, command: str, args: argparse.Namespace,
                   config: ModelConfig | None, t0: float,
                   outputs: list[str], tolerances: dict | None = None) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "arguments": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "config": config.as_dict() if config is not None else None,
        "tolerances": tolerances or {},
        "elapsed_s": time.time() - t0,
        "outputs": outputs,
    }
    path = Path(str(out_path) + ".manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def load_config(path: str) -> ModelConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return validate(raw)


def _parse_axis(spec: str, name: str) -> np.ndarray:
    try:
        lo, hi, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise ConfigError(f"{name} must be MIN:MAX:STEP, got {spec!r}")
    if step <= 0 or hi < lo:
        raise ConfigError(f"{name} must have STEP > 0 and MAX >= MIN, got {spec!r}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _pole_rows(poles):
    for p in poles:
        yield (p.energy.real, p.energy.imag, p.residue.real, p.residue.imag,
               abs(p.residue), p.multiplicity, p.kind)


POLE_HEADER = ["energy_re", "energy_im", "res_re", "res_im", "res_abs",
               "multiplicity", "kind"]


def cmd_bound_states(args) -> int:
    t0 = time.time()
    config = load_config(args.config)
    out = Path(args.out)
    if args.delta_scan:
        deltas = _parse_axis(args.delta_scan, "--delta-scan")
        rows = []
        for delta in deltas:
            cfg = validate({**config.as_dict(), "delta": float(delta)})
            poles = (find_dissipative_poles(cfg) if cfg.bath.dissipative
                     else find_coherent_bse(cfg))
            rows.extend((float(delta),) + r for r in _pole_rows(poles))
        write_csv(out, ["delta"] + POLE_HEADER, rows)
    else:
        poles = (find_dissipative_poles(config) if config.bath.dissipative
                 else find_coherent_bse(config))
        write_csv(out, POLE_HEADER, _pole_rows(poles))
    write_manifest(out, "bound-states", args, config, t0, [str(out)])
    return EXIT_OK


def cmd_dynamics(args) -> int:
    t0 = time.time()
    config = load_config(args.config)
    if args.tmax <= 0:
        raise ConfigError(f"--tmax must be > 0, got {args.tmax}")
    if args.dt <= 0:
        raise ConfigError(f"--dt must be > 0, got {args.dt}")
    t_grid = np.arange(0.0, args.tmax + 0.5 * args.dt, args.dt)
    trace = evolve_finite(config, t_grid, N=args.N, boundary=args.boundary)
    ind = indicator_series(trace, config.emitters.omega_e)
    out = Path(args.out)
    header = ["t", "re_cB", "im_cB", "abs2_cB", "re_cC", "im_cC", "norm",
              "p_loss", "energy", "ergotropy", "power"]
    rows = zip(trace.times, trace.c_B.real, trace.c_B.imag,
               np.abs(trace.c_B) ** 2, trace.c_C.real, trace.c_C.imag,
               trace.norm, trace.p_loss, ind.energy, ind.ergotropy, ind.power)
    write_csv(out, header, rows)
    write_manifest(out, "dynamics", args, config, t0, [str(out)],
                   tolerances={"rtol": 1e-12, "atol": 1e-13})
    return EXIT_OK


def cmd_sweep(args) -> int:
    t0 = time.time()
    config = load_config(args.config)
    delta_axis = _parse_axis(args.delta_grid, "--delta-grid")
    g_axis = _parse_axis(args.g_grid, "--g-grid")
    jobs = args.jobs if args.jobs else default_jobs()
    if args.kind == "mse":
        grid = mse_sweep(delta_axis, g_axis, config, jobs=jobs)
    else:
        grid = max_ergotropy_sweep(delta_axis, g_axis, config, jobs=jobs)
    out = Path(args.out)
    rows = []
    for i, delta in enumerate(grid.delta_axis):
        for k, g in enumerate(grid.g_axis):
            rows.append((delta, g, grid.values[i, k], grid.n_bound[i, k],
                         grid.flags[i, k]))
    write_csv(out, ["delta", "g", "value", "n_bound", "flags"], rows)
    outputs = [str(out)]
    if args.overlay_out:
        overlay_path = Path(args.overlay_out)
        orows = []
        for name, (dvals, gvals) in grid.overlays.items():
            orows.extend((name, d, g) for d, g in zip(dvals, gvals))
        write_csv(overlay_path, ["curve", "delta", "g"], orows)
        outputs.append(str(overlay_path))
    write_manifest(out, "sweep", args, config, t0, outputs)
    return EXIT_OK


def cmd_zeno(args) -> int:
    t0 = time.time()
    config = load_config(args.config)
    if not config.emitters.same_cavity:
        raise ConfigError(
            "zeno requires a same-cavity config (x1 = x2 and alpha = beta): "
            "the dark-state/zero-mode structure does not exist otherwise"
        )
    try:
        kappas = [float(v) for v in args.kappa_grid.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--kappa-grid must be comma-separated numbers, got {args.kappa_grid!r}")
    if not kappas:
        raise ConfigError("--kappa-grid is empty")
    points = max_power_vs_kappa(kappas, config, t_max=args.tmax_power)
    out = Path(args.out)
    rows = []
    for p in points:
        slow = p.slow.energy if p.slow else complex("nan")
        fast = p.fast.energy if p.fast else complex("nan")
        rows.append((p.kappa, p.e0, p.kappa_qze, slow.real, slow.imag,
                     fast.real, fast.imag,
                     abs(p.slow.residue) if p.slow else float("nan"),
                     abs(p.fast.residue) if p.fast else float("nan"),
                     p.max_power, p.flag))
    write_csv(out, ["kappa", "E0", "kappa_qze", "slow_re", "slow_im",
                    "fast_re", "fast_im", "res_slow_abs", "res_fast_abs",
                    "max_power", "flags"], rows)
    write_manifest(out, "zeno", args, config, t0, [str(out)])
    return EXIT_OK


def cmd_greens(args) -> int:
    t0 = time.time()
    config = load_config(args.config)
    parts = args.z.split(",")
    try:
        z = complex(float(parts[0]), float(parts[1]) if len(parts) > 1 else 0.0)
    except (ValueError, IndexError):
        raise ConfigError(f"--z must be RE or RE,IM, got {args.z!r}")
    subl = args.sublattices.upper()
    if len(subl) != 2 or any(s not in "AB" for s in subl):
        raise ConfigError(f"--sublattices must be two letters from A/B, got {args.sublattices!r}")
    value, est = greens_function_with_error(args.x, subl[0], 0, subl[1], z,
                                            config.bath)
    payload = {"re": value.real, "im": value.imag, "method": "quadrature",
               "est_error": est}
    if args.oracle_n:
        lattice = build_finite_lattice(args.oracle_n, "periodic", config.bath)
        c = args.oracle_n // 2
        oracle = greens_function_finite(c + args.x, subl[0], c, subl[1], z, lattice)
        payload.update({"oracle_re": oracle.real, "oracle_im": oracle.imag,
                        "oracle_abs_diff": abs(oracle - value),
                        "oracle_n": args.oracle_n})
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text + "\n")
        write_manifest(out, "greens", args, config, t0, [str(out)])
    return EXIT_OK


def cmd_boundaries(args) -> int:
    t0 = time.time()
    delta_axis = _parse_axis(args.delta_grid, "--delta-grid")
    curves = boundary_curves(delta_axis, args.d)
    out = Path(args.out)
    rows = []
    for name, (dvals, gvals) in curves.items():
        rows.extend((name, d, g) for d, g in zip(dvals, gvals))
    write_csv(out, ["curve", "delta", "g"], rows)
    write_manifest(out, "boundaries", args, None, t0, [str(out)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topobatt",
        description="Quantum battery on a dissipative SSH lattice: bound states, "
                    "dynamics, and thermodynamic performance",
    )
    parser.add_argument("--version", action="version", version=f"topobatt {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("bound-states", help="locate resolvent poles and residues")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delta-scan", default="",
                   help="MIN:MAX:STEP sweep of the dimerization, one pole row per (delta, pole)")
    p.set_defaults(func=cmd_bound_states)

    p = sub.add_parser("dynamics", help="exact finite-lattice evolution to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--N", type=int, default=None,
                   help="unit cells (default: light-cone bound for tmax)")
    p.add_argument("--boundary", choices=("periodic", "open"), default="periodic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("sweep", help="phase-diagram sweep over (delta, g)")
    p.add_argument("--kind", choices=("mse", "ergotropy"), required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--delta-grid", default="-0.99:0.99:0.02")
    p.add_argument("--g-grid", default="0.02:2.0:0.02")
    p.add_argument("--jobs", type=int, default=0,
                   help="worker processes (default: TOPOBATT_JOBS or 1)")
    p.add_argument("--out", required=True)
    p.add_argument("--overlay-out", default="")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("zeno", help="dissipation study of the same-cavity pair")
    p.add_argument("--config", required=True)
    p.add_argument("--kappa-grid", required=True,
                   help="comma-separated kappa_a values")
    p.add_argument("--tmax-power", type=float, default=10.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_zeno)

    p = sub.add_parser("greens", help="bath Green's function at one point (debug)")
    p.add_argument("--config", required=True)
    p.add_argument("--z", required=True, help="RE or RE,IM in units of J")
    p.add_argument("--x", type=int, default=0, help="cell distance")
    p.add_argument("--sublattices", default="AA")
    p.add_argument("--oracle-n", type=int, default=0,
                   help="also invert an N-cell periodic lattice and report the difference")
    p.add_argument("--out", default="")
    p.set_defaults(func=cmd_greens)

    p = sub.add_parser("boundaries", help="sampled phase-boundary curves to CSV")
    p.add_argument("--d", type=int, required=True, help="cell distance (nonzero)")
    p.add_argument("--delta-grid", default="-0.99:0.99:0.01")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boundaries)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (SolverError, TopobattError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
