"""kerrmag command line.

Exit codes: 0 ok, 2 usage, 3 config file error, 4 invalid input,
5 numerical failure, 6 oracle cross-check failed, 1 anything else.
Errors are reported as one JSON record on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dynamics import IntegrationConfig, MeanFieldState, relax_to_steady
from .errors import InvalidInputError, KerrMagError, NumericalFailure
from .model import DriveTarget
from .output import dumps, to_plain, write_csv, write_json
from .params import CrystalAxis, derive_all
from .response import spectrum_map
from .steady import bistability_analysis, effective_params, rabi_from_power, solve_shift_cubic, threshold_detuning
from .sweep import Direction, SweepAxis, SweepPlan, hysteresis_area, hysteresis_sweep
from .verify import cross_check, sample_case

EXIT_CONFIG = 3
EXIT_INVALID = 4
EXIT_NUMERICAL = 5
EXIT_ORACLE = 6

log = logging.getLogger("kerrmag")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("KERRMAG_THREADS", "1")))
    except ValueError:
        return 1


def _emit(args, payload: dict, files: dict[str, tuple]) -> None:
    """Print the summary; write files only when --out is given."""
    if args.out:
        out = Path(args.out)
        written = []
        for name, entry in files.items():
            if entry[0] == "json":
                written.append(write_json(out / name, entry[1], args.resolved))
            else:
                written.append(write_csv(out / name, entry[1], entry[2], args.resolved))
        payload = {**payload, "files": [str(p) for p in written]}
    sys.stdout.write(dumps(payload))


def _apply_overrides(cfg: RunConfig, args) -> None:
    if getattr(args, "drive_power", None) is not None and cfg.drive is not None:
        cfg.drive = cfg.drive.replace(power=args.drive_power)
    if getattr(args, "target", None) and cfg.drive is not None:
        cfg.drive = cfg.drive.replace(target=DriveTarget(args.target))


# -- subcommands ------------------------------------------------------------


def cmd_params(cfg: RunConfig, args) -> int:
    cfg.require("material")
    mg = cfg.material
    if args.diameter is not None:
        mg = dataclasses.replace(mg, diameter=args.diameter * 1e-3)
    if args.axis is not None:
        mg = dataclasses.replace(mg, crystal_axis=CrystalAxis(args.axis))
    derived = derive_all(mg).as_dict()
    derived.update(
        {"g_m_MHz": derived["g_m_Hz"] * 1e-6, "K_nHz": derived["K_Hz"] * 1e9,
         "omega_m_GHz": derived["omega_m_Hz"] * 1e-9}
    )
    if not args.out:
        width = max(len(k) for k in derived)
        for key, value in derived.items():
            sys.stdout.write(f"{key:<{width}}  {value:.6g}\n")
        return 0
    rows = [(k, v) for k, v in derived.items()]
    _emit(args, {"params": derived},
          {"params.json": ("json", {"params": derived}), "params.csv": ("csv", ["quantity", "value"], rows)})
    return 0


def _solution_record(sol) -> dict:
    return {
        "shift_MHz": sol.shift,
        "B0": sol.b0,
        "A0": sol.a0,
        "magnon_number": abs(sol.b0) ** 2,
        "stable": sol.stable,
        "branch": sol.branch,
        "degenerate": sol.degenerate,
    }


def cmd_steady(cfg: RunConfig, args) -> int:
    cfg.require("system", "drive")
    eff = effective_params(cfg.system, cfg.drive)
    sols = solve_shift_cubic(cfg.system, cfg.drive, eff)
    payload = {
        "effective": eff,
        "rabi_MHz": rabi_from_power(cfg.drive, cfg.system.kerr),
        "roots": [_solution_record(s) for s in sols],
    }
    _emit(args, payload, {"steady.json": ("json", payload)})
    return 0


def cmd_bistability(cfg: RunConfig, args) -> int:
    cfg.require("system", "drive")
    eff = effective_params(cfg.system, cfg.drive)
    report = bistability_analysis(eff, cfg.drive)
    yig = bistability_analysis(eff, cfg.drive.replace(target=DriveTarget.YIG)).critical_power
    cav = bistability_analysis(eff, cfg.drive.replace(target=DriveTarget.CAVITY)).critical_power
    payload = {
        "effective": eff,
        "bistable": report.bistable,
        "switching_shifts_MHz": report.switching_shifts,
        "fold_powers_mW": report.fold_powers,
        "critical_power_mW": report.critical_power,
        "P_m_mW": yig,
        "P_c_mW": cav,
    }
    _emit(args, payload, {"bistability.json": ("json", payload)})
    return 0


def _plan(cfg: RunConfig, args) -> SweepPlan:
    cfg.require("system", "drive")
    s = cfg.sweep
    for key in ("axis", "direction", "start", "stop", "points"):
        value = getattr(args, key, None)
        if value is not None:
            s[key] = value
    return SweepPlan(
        axis=SweepAxis(s.get("axis", "omega_m")),
        values=tuple(cfg.sweep_values()),
        direction=Direction(s.get("direction", "both")),
        system=cfg.system,
        drive=cfg.drive,
        jump_factor=float(s.get("jump_factor", 10.0)),
    )


def _trace_rows(trace):
    return [(x.value, x.shift, x.branch.value, x.root_count, x.stable_count) for x in trace.samples]


def cmd_sweep(cfg: RunConfig, args) -> int:
    plan = _plan(cfg, args)
    result = hysteresis_sweep(plan, workers=_threads())
    traces = result if isinstance(result, tuple) else (result,)
    files = {}
    summary = {"axis": plan.axis, "traces": []}
    header = [plan.axis.value, "shift_MHz", "branch", "root_count", "stable_count"]
    for tr in traces:
        files[f"sweep_{tr.direction.value}.csv"] = ("csv", header, _trace_rows(tr))
        summary["traces"].append({"direction": tr.direction, "samples": len(tr.samples),
                                  "switchings": tr.switchings})
        if args.all_roots:
            rows = [(x.value, r.shift, r.branch.value, r.stable)
                    for x, roots in zip(tr.samples, tr.roots) for r in roots]
            files[f"sweep_{tr.direction.value}_roots.csv"] = (
                "csv", [plan.axis.value, "shift_MHz", "branch", "stable"], rows)
    if len(traces) == 2:
        summary["hysteresis_area"] = hysteresis_area(*traces)
    files["sweep_summary.json"] = ("json", summary)
    _emit(args, summary, files)
    return 0


def cmd_spectrum(cfg: RunConfig, args) -> int:
    cfg.require("system", "drive")
    probe = cfg.probe_axis()
    s = cfg.sweep
    grid = np.linspace(s.get("start", cfg.system.omega_c - 100.0), s.get("stop", cfg.system.omega_c + 100.0),
                       int(s.get("points", 401)))
    direction = Direction(args.direction or s.get("direction", "both"))
    directions = [Direction.UP, Direction.DOWN] if direction is Direction.BOTH else [direction]

    def one(d):
        return spectrum_map(cfg.system, cfg.drive, probe, grid, d, float(s.get("jump_factor", 10.0)))

    with ThreadPoolExecutor(max_workers=min(_threads(), len(directions))) as pool:
        maps = list(pool.map(one, directions))
    files, summary = {}, {"maps": []}
    for d, m in zip(directions, maps):
        rows = (
            (wp, wm, m.magnitude[i, j], m.phase[i, j], m.branches[i])
            for i, wm in enumerate(m.omega_m)
            for j, wp in enumerate(m.probe)
        )
        files[f"spectrum_{d.value}.csv"] = ("csv", ["omega_p_MHz", "omega_m_MHz", "abs_S21", "phase", "branch"],
                                            list(rows))
        grid_payload = {"direction": d, "omega_p_MHz": m.probe, "omega_m_MHz": m.omega_m,
                        "abs_S21": m.magnitude, "phase": m.phase, "shift_MHz": m.shifts, "branch": m.branches}
        files[f"spectrum_{d.value}.json"] = ("json", grid_payload)
        summary["maps"].append({"direction": d, "shape": list(m.magnitude.shape),
                                "switchings": m.trace.switchings})
    _emit(args, summary, files)
    return 0


def cmd_critical(cfg: RunConfig, args) -> int:
    cfg.require("system")
    sysc = cfg.system
    c = cfg.drive.c if cfg.drive is not None else (2.0 if sysc.kerr >= 0 else -2.0)
    k = cfg.critical
    for key in ("start", "stop", "points"):
        value = getattr(args, key, None)
        if value is not None:
            k[key] = value
    detunings = np.linspace(k.get("start", -400.0), k.get("stop", 400.0), int(k.get("points", 161)))
    sign = 1.0 if sysc.kerr >= 0 else -1.0

    def one(delta):
        return threshold_detuning(float(delta), sysc.g_m, sysc.kappa_c, sysc.gamma_m, sign, c)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, detunings))
    rows = [(r.detuning, r.delta_m, r.eta, r.power_yig, r.power_cavity) for r in results]
    payload = {"points": len(rows), "rows": [dict(zip(("Delta_MHz", "delta_m_MHz", "eta", "P_m_mW", "P_c_mW"), r))
                                             for r in rows]}
    _emit(args, {"points": len(rows)} if args.out else payload,
          {"critical.csv": ("csv", ["Delta_MHz", "delta_m_MHz", "eta", "P_m_mW", "P_c_mW"], rows),
           "critical.json": ("json", payload)})
    return 0


def cmd_oracle(cfg: RunConfig, args) -> int:
    cfg.require("system", "drive")
    o = cfg.oracle
    samples = args.samples if args.samples is not None else int(o.get("samples", 100))
    seed = args.seed if args.seed is not None else int(o.get("seed", 0))
    spread = float(o.get("spread", 0.5))
    rng = np.random.default_rng(seed)
    targets = [DriveTarget.YIG, DriveTarget.CAVITY]
    cases = [sample_case(cfg.system, cfg.drive, rng, spread, targets[i % 2]) for i in range(samples)]
    report = cross_check(cases, rng)
    payload = {"samples": samples, "seed": seed, **report.as_dict(),
               "summary": f"{report.reproduced}/{report.stable_roots} stable roots reproduced within 1e-6"}
    files = {"oracle.json": ("json", payload)}
    if args.dump_trajectory:
        res = relax_to_steady(MeanFieldState(0j, 0j), cfg.system, cfg.drive, IntegrationConfig(), record_every=10)
        write_csv(Path(args.dump_trajectory), ["time_us", "re_A", "im_A", "re_B", "im_B"],
                  res.trajectory.tolist(), args.resolved)
    _emit(args, payload, files)
    return 0 if report.passed else EXIT_ORACLE


COMMANDS = {
    "params": cmd_params,
    "steady": cmd_steady,
    "bistability": cmd_bistability,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "critical": cmd_critical,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrmag", description="Magnon Kerr bistability in cavity magnonics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="TOML file or preset name (e.g. power-resonant)")
        p.add_argument("--out", help="directory for CSV/JSON output")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = add("params", "derived g_m, K, omega_m and anisotropy coefficients")
    p.add_argument("--diameter", type=float, help="sphere diameter in mm")
    p.add_argument("--axis", choices=[a.value for a in CrystalAxis])

    for name, help_ in (("steady", "steady states for one configuration"),
                        ("bistability", "switching points and critical powers")):
        p = add(name, help_)
        p.add_argument("--drive-power", type=float, help="mW")
        p.add_argument("--target", choices=[t.value for t in DriveTarget])

    p = add("sweep", "hysteresis sweep over power or magnon frequency")
    p.add_argument("--axis", choices=[a.value for a in SweepAxis])
    p.add_argument("--direction", choices=[d.value for d in Direction])
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--drive-power", type=float)
    p.add_argument("--target", choices=[t.value for t in DriveTarget])
    p.add_argument("--all-roots", action="store_true", help="also dump every root per sample")

    p = add("spectrum", "|S21| map over probe and magnon frequency")
    p.add_argument("--direction", choices=[d.value for d in Direction])
    p.add_argument("--drive-power", type=float)

    p = add("critical", "threshold detuning and critical powers versus cavity-magnon detuning")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)

    p = add("oracle", "cross-check steady states against time integration")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dump-trajectory", help="CSV path for a relaxation trajectory from vacuum")
    return parser


def _fail(code: int, exc: BaseException) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    diagnostics = getattr(exc, "diagnostics", None)
    if diagnostics:
        record["diagnostics"] = {k: repr(v) for k, v in diagnostics.items()}
    sys.stderr.write(json.dumps(to_plain(record), sort_keys=True) + "\n")
    return code


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        args.resolved = cfg.resolved()
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except InvalidInputError as exc:
        return _fail(EXIT_INVALID, exc)
    except NumericalFailure as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except KerrMagError as exc:
        return _fail(1, exc)
    except Exception as exc:  # noqa: BLE001 - last-resort record for scripted callers
        log.debug("unexpected failure", exc_info=True)
        return _fail(1, exc)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
