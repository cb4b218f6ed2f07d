"""Batch command line: scenario runs, the bench comparison suite, sweeps,
curve exports, and the teleoperation service launcher.

Commands: `run` (one scenario to trace CSV + summary JSON), `paper-suite`
(every bench experiment, one comparison table with a tolerance verdict
per row), `sweep` (independent scenarios on a bounded worker pool),
`inflate-curve` and `traction` (plot-ready CSV exports), `serve` (live
teleoperation backend).

Every command writes a manifest next to its outputs: content digests of
the input documents, package and library versions, a determinism note,
and a digest per output file.  Nothing here uses randomness or wall
time, so rerunning a command with the same inputs in the same
environment reproduces every output byte for byte; the manifest is the
receipt to check that against.

Exit codes: 0 done (suite: all rows pass), 2 stalled (suite: some row
failed), 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from hashlib import sha256
from pathlib import Path

from . import __version__
from .calibration import Calibration, load_calibration
from .contact import tilt_angle
from .errors import ScenarioError, SimulationError
from .lumen import paper_fixtures
from .membrane import pressure_curve, write_pressure_curve_csv
from .navigation import (
    Command,
    RobotModel,
    SimConfig,
    TimedCommand,
    matched_inflation_kPa,
    run,
    stall_pressure_kPa,
    traction_sweep,
)
from .scenario import ScenarioSpec, load_scenario, run_scenario

OUT_DIR_ENV = "EVERTRACK_OUT_DIR"

DETERMINISM_NOTE = (
    "seed-free: no command draws random numbers; every output is a pure "
    "function of the input documents and the versions recorded here, so "
    "rerunning in this environment reproduces the outputs byte for byte"
)

# Bench reference numbers the default calibration was fitted against.
# The suite reruns every experiment fresh and grades it against these.
BENCH_INFLATION_MM = {
    1.0: 0.44, 2.0: 1.00, 5.0: 3.20, 8.0: 6.33, 10.0: 8.75,
    13.0: 12.37, 16.0: 15.78, 18.0: 17.93, 20.0: 19.99, 22.0: 21.97,
}
BENCH_PIPE_SPEED_MMPS = 4.7          # all three rigid pipes, both ways
PIPE_SPEED_TOL = 0.15
PIPE_ASYMMETRY_TOL = 0.10
BENCH_SUPPORTED_FWD_MMPS = 3.4
BENCH_COLLAPSED_FWD_MMPS = 2.35
BENCH_SUPPORTED_BWD_MMPS = 3.9       # deflated only
PHANTOM_SPEED_TOL = 0.20
BENCH_TRACTION_N = {0.0: 1.0, 5.0: 1.3, 10.0: 1.6, 13.0: 1.85, 16.0: 2.1}
TRACTION_TOL = 0.25
TRACTION_RATIO_RANGE = (1.7, 2.3)    # 16 kPa over 0 kPa
TRACTION_PEAK_RANGE = (1.5, 2.5)
BENCH_TILT_DEG = 10.0
TILT_TOL_DEG = 2.0
STALL_FLOOR_KPA = 16.0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ScenarioError as exc:
        where = f" at {exc.field}" if getattr(exc, "field", None) else ""
        print(f"scenario error{where}: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; 2 means "stalled" here, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="evertrack",
        description="Quasi-static capsule-robot simulator: batch runs, the "
                    "bench comparison suite, and the teleoperation service.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_p = sub.add_parser("run", help="run one scenario, write trace + summary")
    run_p.add_argument("scenario",
                       help="packaged scenario name or path to a scenario file")
    _add_out(run_p)
    run_p.set_defaults(handler=cmd_run)

    suite_p = sub.add_parser(
        "paper-suite",
        help="rerun every bench experiment and grade it against the "
             "reference numbers",
    )
    _add_out(suite_p)
    suite_p.set_defaults(handler=cmd_paper_suite)

    sweep_p = sub.add_parser(
        "sweep", help="run independent scenarios on a bounded worker pool"
    )
    sweep_p.add_argument("scenarios", nargs="+",
                         help="scenario names or paths, one run each")
    sweep_p.add_argument("--workers", type=int, default=None,
                         help="worker processes (default: min(4, cases))")
    _add_out(sweep_p)
    sweep_p.set_defaults(handler=cmd_sweep)

    curve_p = sub.add_parser(
        "inflate-curve", help="export the pressure-displacement curve as CSV"
    )
    curve_p.add_argument("--calibration", default="default")
    curve_p.add_argument("--style", choices=("LF", "CF", "both"), default="LF",
                         help="flange style to sweep (default LF)")
    curve_p.add_argument("--max-kpa", type=float, default=22.0)
    curve_p.add_argument("--step-kpa", type=float, default=0.5)
    _add_out(curve_p)
    curve_p.set_defaults(handler=cmd_inflate_curve)

    traction_p = sub.add_parser(
        "traction", help="export the anchored pull-test sweep as CSV"
    )
    traction_p.add_argument("--calibration", default="default")
    traction_p.add_argument("--lumen", default="phantom_collapsed",
                            choices=sorted(paper_fixtures()),
                            help="fixture to pull against")
    _add_out(traction_p)
    traction_p.set_defaults(handler=cmd_traction)

    serve_p = sub.add_parser(
        "serve", help="start the live teleoperation service"
    )
    serve_p.add_argument("--scenario", default="pipe84",
                         help="scenario providing lumen, calibration, and "
                              "initial command")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8765)
    serve_p.add_argument("--rate-hz", type=float, default=20.0)
    serve_p.add_argument("--static", default=None, metavar="DIR",
                         help="serve the operator console from this "
                              "directory (default: ./frontend/dist when "
                              "present)")
    _add_out(serve_p)
    serve_p.set_defaults(handler=cmd_serve)

    return parser


def _add_out(parser) -> None:
    parser.add_argument(
        "--out", default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or ./evertrack-out)",
    )


def _resolve_out(arg: str | None) -> Path:
    out = Path(arg or os.environ.get(OUT_DIR_ENV) or "evertrack-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _versions() -> dict:
    import numpy
    import scipy
    import yaml

    return {
        "evertrack": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "pyyaml": yaml.__version__,
        "python": platform.python_version(),
    }


def _sha256_file(path: Path) -> str:
    return sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, config: dict,
                    outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "determinism": DETERMINISM_NOTE,
        "outputs": {
            p.relative_to(out).as_posix(): _sha256_file(p) for p in outputs
        },
        "versions": _versions(),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- run -----------------------------------------------------------------------

_EXIT_BY_TERMINATION = {"exit": 0, "stall": 2, "max_steps": 1}


def cmd_run(args) -> int:
    out = _resolve_out(args.out)
    code, _ = _execute_run(args.scenario, out, echo=True)
    return code


def _execute_run(scenario: str, out: Path, *, echo: bool = False) -> tuple[int, dict]:
    spec = load_scenario(scenario)
    trace = run_scenario(spec)

    trace_path = out / f"{spec.name}_trace.csv"
    trace_path.write_text(trace.to_csv())
    summary_path = out / f"{spec.name}_summary.json"
    summary_path.write_text(json.dumps(trace.summary, indent=2) + "\n")
    _write_manifest(
        out, "run",
        {
            "scenario": {"name": spec.name, "digest": spec.digest},
            "calibration": {"name": spec.calibration.name,
                            "digest": spec.calibration.digest},
        },
        [trace_path, summary_path],
    )

    s = trace.summary
    if echo:
        if s["completed"]:
            print(f"{spec.name}: traversed {s['distance_mm']:.1f} mm in "
                  f"{s['elapsed_s']:.1f} s, mean {s['mean_speed_mmps']:.3f} mm/s")
        elif s["termination"] == "stall":
            print(f"{spec.name}: stalled at s = {s['final_s_mm']:.1f} mm "
                  f"after {s['elapsed_s']:.1f} s")
        else:
            print(f"{spec.name}: gave up after {s['steps']} steps at "
                  f"s = {s['final_s_mm']:.1f} mm")
    return _EXIT_BY_TERMINATION[s["termination"]], s


# -- paper suite ---------------------------------------------------------------


def cmd_paper_suite(args) -> int:
    out = _resolve_out(args.out)
    (out / "runs").mkdir(exist_ok=True)
    cal = load_calibration("default")
    robot = cal.build_robot()  # one membrane cache across every case

    rows: list[dict] = []
    cases: dict[str, dict] = {}
    outputs: list[Path] = []

    outputs += _suite_inflation(cal, out, rows)
    outputs += _suite_pipes(cal, robot, out, rows, cases)
    outputs += _suite_phantoms(cal, robot, out, rows, cases)
    outputs += _suite_traction(cal, robot, out, rows)
    _suite_tilt(cal, robot, rows)

    report = {
        "calibration": {"name": cal.name, "digest": cal.digest},
        "rows": rows,
        "cases": cases,
    }
    report_json = out / "report.json"
    report_json.write_text(json.dumps(report, indent=2) + "\n")
    report_txt = out / "report.txt"
    report_txt.write_text(_format_report(rows))
    outputs += [report_json, report_txt]

    _write_manifest(
        out, "paper-suite",
        {"calibration": {"name": cal.name, "digest": cal.digest}},
        outputs,
    )

    print(report_txt.read_text(), end="")
    failed = [r for r in rows if r["verdict"] != "PASS"]
    print(f"{len(rows) - len(failed)}/{len(rows)} rows pass")
    return 2 if failed else 0


def _row(rows: list[dict], group: str, row_id: str, measured,
         reference: str, passed: bool) -> None:
    rows.append({
        "row": row_id,
        "group": group,
        "measured": round(measured, 4) if isinstance(measured, float) else measured,
        "reference": reference,
        "verdict": "PASS" if passed else "FAIL",
    })


def _fail_row(rows: list[dict], group: str, row_id: str, reference: str,
              exc: Exception) -> None:
    _row(rows, group, row_id, f"error: {exc}", reference, passed=False)


def _format_report(rows: list[dict]) -> str:
    header = f"{'row':34} {'group':10} {'measured':>28} {'reference':26} verdict"
    lines = [header, "-" * len(header)]
    for r in rows:
        measured = r["measured"]
        text = f"{measured:.4f}" if isinstance(measured, float) else str(measured)
        lines.append(f"{r['row']:34} {r['group']:10} {text:>28} "
                     f"{r['reference']:26} {r['verdict']}")
    return "\n".join(lines) + "\n"


def _suite_inflation(cal: Calibration, out: Path, rows: list[dict]) -> list[Path]:
    group, ref = "inflation", "within 0.05 mm of the bench curve"
    try:
        grid = [round(0.5 * i, 6) for i in range(1, 45)]  # 0.5 .. 22.0
        curve = pressure_curve(cal.profile, cal.material, grid)
        path = out / "inflate_curve.csv"
        write_pressure_curve_csv(curve, path)
        by_p = dict(curve)
        dev = max(abs(by_p[p] - d) for p, d in BENCH_INFLATION_MM.items())
        _row(rows, group, "inflation_curve_max_dev_mm", dev, ref, dev <= 0.05)
        return [path]
    except Exception as exc:  # noqa: BLE001 - grade the row, keep the suite going
        _fail_row(rows, group, "inflation_curve_max_dev_mm", ref, exc)
        return []


def _full_speed_schedule(robot: RobotModel, p_kPa: float,
                         direction: int) -> list[TimedCommand]:
    motor = direction * robot.max_motor_speed_radps
    return [TimedCommand(0.0, Command(motor, p_kPa, p_kPa))]


def _run_case(case_id: str, robot: RobotModel, lumen, p_kPa: float,
              direction: int, out: Path, cases: dict[str, dict]) -> dict:
    config = SimConfig()
    s0 = 0.0 if direction > 0 else lumen.total_length_mm
    trace = run(lumen, robot, _full_speed_schedule(robot, p_kPa, direction),
                config, s0_mm=s0, exit_end="far" if direction > 0 else "near")
    path = out / "runs" / f"{case_id}.csv"
    path.write_text(trace.to_csv())
    cases[case_id] = {
        "pressure_kPa": p_kPa,
        "direction": "forward" if direction > 0 else "backward",
        "trace_csv": path.relative_to(out).as_posix(),
        "summary": trace.summary,
        "tracks_in_contact_at_start": trace.rows[0].contact.tracks_in_contact,
    }
    return cases[case_id]


def _suite_pipes(cal: Calibration, robot: RobotModel, out: Path,
                 rows: list[dict], cases: dict[str, dict]) -> list[Path]:
    fixtures = paper_fixtures()
    group = "rigid_pipe"
    speed_ref = (f"{BENCH_PIPE_SPEED_MMPS:.2f} mm/s "
                 f"+/- {PIPE_SPEED_TOL:.0%}")
    outputs: list[Path] = []
    for diameter in (74, 84, 94):
        name = f"pipe{diameter}"
        lumen = fixtures[name]
        speeds: dict[int, float] = {}
        try:
            seat = robot.quantize_pressure(matched_inflation_kPa(
                robot, diameter / 2.0,
                interference_mm=cal.matched_interference_mm,
            ))
        except Exception as exc:  # noqa: BLE001
            for way in ("forward", "backward"):
                _fail_row(rows, group, f"{name}_{way}_mmps", speed_ref, exc)
            _fail_row(rows, group, f"{name}_speed_asymmetry",
                      f"<= {PIPE_ASYMMETRY_TOL:.0%}", exc)
            continue
        for direction, way in ((1, "forward"), (-1, "backward")):
            row_id = f"{name}_{way}_mmps"
            try:
                case = _run_case(f"{name}_{way}", robot, lumen, seat,
                                 direction, out, cases)
                outputs.append(out / case["trace_csv"])
                # mean speed is signed along s; grade the travel speed
                v = direction * case["summary"]["mean_speed_mmps"]
                speeds[direction] = v
                _row(rows, group, row_id, v, speed_ref,
                     case["summary"]["completed"]
                     and abs(v - BENCH_PIPE_SPEED_MMPS)
                     <= PIPE_SPEED_TOL * BENCH_PIPE_SPEED_MMPS)
            except Exception as exc:  # noqa: BLE001
                _fail_row(rows, group, row_id, speed_ref, exc)
        if len(speeds) == 2:
            asym = abs(speeds[1] - speeds[-1]) / max(speeds.values())
            _row(rows, group, f"{name}_speed_asymmetry", asym,
                 f"<= {PIPE_ASYMMETRY_TOL:.0%}", asym <= PIPE_ASYMMETRY_TOL)
    if "pipe74_forward" in cases:
        n = cases["pipe74_forward"]["tracks_in_contact_at_start"]
        _row(rows, group, "pipe74_tracks_in_contact", float(n),
             "5 of 6 (gravity unloads the top)", n == 5)
    return outputs


def _suite_phantoms(cal: Calibration, robot: RobotModel, out: Path,
                    rows: list[dict], cases: dict[str, dict]) -> list[Path]:
    fixtures = paper_fixtures()
    group = "phantom"
    outputs: list[Path] = []
    targets = {
        "phantom_supported": (BENCH_SUPPORTED_FWD_MMPS, "supported"),
        "phantom_collapsed": (BENCH_COLLAPSED_FWD_MMPS, "collapsed"),
    }
    for fixture, (target, label) in targets.items():
        lumen = fixtures[fixture]
        for p in cal.phantom_inflations_kPa:
            row_id = f"{label}_p{p:g}_forward_mmps"
            ref = f"{target:.2f} mm/s +/- {PHANTOM_SPEED_TOL:.0%}"
            try:
                case = _run_case(f"{label}_p{p:g}_forward", robot, lumen,
                                 p, 1, out, cases)
                outputs.append(out / case["trace_csv"])
                v = case["summary"]["mean_speed_mmps"]
                _row(rows, group, row_id, v, ref,
                     case["summary"]["completed"]
                     and abs(v - target) <= PHANTOM_SPEED_TOL * target)
            except Exception as exc:  # noqa: BLE001
                _fail_row(rows, group, row_id, ref, exc)

    ref = f"{BENCH_SUPPORTED_BWD_MMPS:.2f} mm/s +/- {PHANTOM_SPEED_TOL:.0%}"
    try:
        case = _run_case("supported_p0_backward", robot,
                         fixtures["phantom_supported"], 0.0, -1, out, cases)
        outputs.append(out / case["trace_csv"])
        v = -case["summary"]["mean_speed_mmps"]
        _row(rows, group, "supported_p0_backward_mmps", v, ref,
             case["summary"]["completed"]
             and abs(v - BENCH_SUPPORTED_BWD_MMPS)
             <= PHANTOM_SPEED_TOL * BENCH_SUPPORTED_BWD_MMPS)
    except Exception as exc:  # noqa: BLE001
        _fail_row(rows, group, "supported_p0_backward_mmps", ref, exc)

    needed = ("pipe84_forward", "supported_p10_forward", "collapsed_p10_forward")
    if all(k in cases for k in needed):
        vr, vs, vc = (cases[k]["summary"]["mean_speed_mmps"] for k in needed)
        _row(rows, group, "speed_ordering",
             f"{vr:.3f} > {vs:.3f} > {vc:.3f}",
             "rigid > supported > collapsed", vr > vs > vc)
    else:
        _row(rows, group, "speed_ordering", "missing cases",
             "rigid > supported > collapsed", False)
    return outputs


def _write_traction_csv(path: Path, sweep: list[dict]) -> None:
    lines = ["pressure_kPa,traction_N,total_normal_N,tracks_in_contact,stalled"]
    for entry in sweep:
        lines.append(
            f"{entry['pressure_kPa']:.6g},{entry['traction_N']:.9g},"
            f"{entry['total_normal_N']:.9g},{entry['tracks_in_contact']},"
            f"{str(entry['stalled']).lower()}"
        )
    path.write_text("\n".join(lines) + "\n")


def _suite_traction(cal: Calibration, robot: RobotModel, out: Path,
                    rows: list[dict]) -> list[Path]:
    group = "traction"
    lumen = paper_fixtures()["phantom_collapsed"]
    try:
        sweep = traction_sweep(robot, lumen, cal.traction_pressures_kPa)
    except Exception as exc:  # noqa: BLE001
        for p in cal.traction_pressures_kPa:
            _fail_row(rows, group, f"traction_{p:g}kPa_N",
                      f"{BENCH_TRACTION_N.get(p, math.nan):.2f} N "
                      f"+/- {TRACTION_TOL:.0%}", exc)
        return []
    path = out / "traction.csv"
    _write_traction_csv(path, sweep)

    by_p = {entry["pressure_kPa"]: entry["traction_N"] for entry in sweep}
    for p, target in BENCH_TRACTION_N.items():
        measured = by_p.get(p)
        ref = f"{target:.2f} N +/- {TRACTION_TOL:.0%}"
        if measured is None:
            _row(rows, group, f"traction_{p:g}kPa_N", "missing", ref, False)
        else:
            _row(rows, group, f"traction_{p:g}kPa_N", measured, ref,
                 abs(measured - target) <= TRACTION_TOL * target)

    values = [entry["traction_N"] for entry in sweep]
    monotone = all(b > a for a, b in zip(values, values[1:]))
    _row(rows, group, "traction_monotone",
         " < ".join(f"{v:.3f}" for v in values),
         "strictly increasing with pressure", monotone)
    if by_p.get(0.0, 0.0) > 0:
        ratio = by_p[16.0] / by_p[0.0]
        lo, hi = TRACTION_RATIO_RANGE
        _row(rows, group, "traction_ratio_16_over_0", ratio,
             f"in [{lo}, {hi}]", lo <= ratio <= hi)
    else:
        _row(rows, group, "traction_ratio_16_over_0", "undefined",
             f"in {TRACTION_RATIO_RANGE}", False)
    lo, hi = TRACTION_PEAK_RANGE
    peak = max(values)
    _row(rows, group, "traction_peak_N", peak, f"in [{lo}, {hi}]",
         lo <= peak <= hi)
    return [path]


def _suite_tilt(cal: Calibration, robot: RobotModel, rows: list[dict]) -> None:
    group = "tilt"
    pipe94_radius = 47.0
    p_max = cal.max_pressure_kPa
    ref = f"{BENCH_TILT_DEG:.0f} deg +/- {TILT_TOL_DEG:.0f}"
    try:
        fwd = tilt_angle((p_max, 0.0), pipe94_radius, robot.geometry,
                         robot.chamber)
        rev = tilt_angle((0.0, p_max), pipe94_radius, robot.geometry,
                         robot.chamber)
        _row(rows, group, "tilt_differential_deg", abs(fwd.tilt_deg), ref,
             abs(abs(fwd.tilt_deg) - BENCH_TILT_DEG) <= TILT_TOL_DEG)
        residual = fwd.tilt_deg + rev.tilt_deg
        _row(rows, group, "tilt_antisymmetry_deg", residual,
             "0 (exact sign flip)", residual == 0.0)
    except Exception as exc:  # noqa: BLE001
        _fail_row(rows, group, "tilt_differential_deg", ref, exc)
        _fail_row(rows, group, "tilt_antisymmetry_deg", "0 (exact sign flip)",
                  exc)

    ref = f"> {STALL_FLOOR_KPA:g} kPa, below the membrane cap"
    try:
        lumen = paper_fixtures()["phantom_collapsed"]
        stall = stall_pressure_kPa(robot, lumen)
        if stall is None:
            _row(rows, "stall", "overinflation_stall_kPa",
                 "none below membrane cap", ref, False)
        else:
            _row(rows, "stall", "overinflation_stall_kPa", stall, ref,
                 stall > STALL_FLOOR_KPA)
    except Exception as exc:  # noqa: BLE001
        _fail_row(rows, "stall", "overinflation_stall_kPa", ref, exc)


# -- sweep ---------------------------------------------------------------------


def _sweep_worker(job: tuple[str, str]) -> tuple[str, int, dict | str]:
    scenario, out_dir = job
    try:
        code, summary = _execute_run(scenario, Path(out_dir))
        return scenario, code, summary
    except (ScenarioError, SimulationError, OSError) as exc:
        return scenario, 1, str(exc)


def cmd_sweep(args) -> int:
    out = _resolve_out(args.out)
    specs = [load_scenario(s) for s in args.scenarios]  # fail fast, pre-pool
    names = [spec.name for spec in specs]
    if len(set(names)) != len(names):
        raise ScenarioError("sweep scenarios must have distinct names "
                            f"(got {', '.join(names)})")

    jobs = []
    for scenario, spec in zip(args.scenarios, specs):
        sub = out / spec.name
        sub.mkdir(parents=True, exist_ok=True)
        jobs.append((scenario, str(sub)))

    workers = args.workers or min(4, os.cpu_count() or 1, len(jobs))
    if workers < 1:
        raise ScenarioError(f"--workers must be >= 1, got {workers}")
    results = {}
    if workers == 1:
        for job in jobs:
            scenario, code, payload = _sweep_worker(job)
            results[scenario] = (code, payload)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for scenario, code, payload in pool.map(_sweep_worker, jobs):
                results[scenario] = (code, payload)

    index = {}
    codes = []
    for (scenario, spec) in zip(args.scenarios, specs):
        code, payload = results[scenario]
        entry = {"exit_code": code, "directory": spec.name}
        if isinstance(payload, dict):
            entry["summary"] = payload
        else:
            entry["error"] = payload
        index[spec.name] = entry
        codes.append(code)
        print(f"{spec.name}: exit {code}")
    worst = 1 if 1 in codes else 2 if 2 in codes else 0
    index_path = out / "sweep_index.json"
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "sweep", {"workers": workers,
                                   "scenarios": sorted(index)},
                    [index_path])
    return worst


# -- curve / traction exports ---------------------------------------------------


def cmd_inflate_curve(args) -> int:
    out = _resolve_out(args.out)
    cal = load_calibration(args.calibration)
    if args.step_kpa <= 0 or args.max_kpa <= 0:
        raise ScenarioError("--step-kpa and --max-kpa must be positive")
    styles = ("LF", "CF") if args.style == "both" else (args.style,)
    n = int(round(args.max_kpa / args.step_kpa))
    grid = [round(args.step_kpa * i, 9) for i in range(1, n + 1)]
    outputs = []
    for style in styles:
        profile = replace(cal.profile, flange_style=style)
        curve = pressure_curve(profile, cal.material, grid)
        path = out / f"inflate_curve_{style}.csv"
        write_pressure_curve_csv(curve, path)
        outputs.append(path)
        print(f"{style}: {len(curve)} points to {path}")
    _write_manifest(
        out, "inflate-curve",
        {"calibration": {"name": cal.name, "digest": cal.digest},
         "styles": list(styles), "max_kPa": args.max_kpa,
         "step_kPa": args.step_kpa},
        outputs,
    )
    return 0


def cmd_traction(args) -> int:
    out = _resolve_out(args.out)
    cal = load_calibration(args.calibration)
    robot = cal.build_robot()
    lumen = paper_fixtures()[args.lumen]
    sweep = traction_sweep(robot, lumen, cal.traction_pressures_kPa)
    path = out / "traction.csv"
    _write_traction_csv(path, sweep)
    for entry in sweep:
        print(f"{entry['pressure_kPa']:5.1f} kPa: {entry['traction_N']:.3f} N "
              f"({entry['tracks_in_contact']} tracks)")
    _write_manifest(
        out, "traction",
        {"calibration": {"name": cal.name, "digest": cal.digest},
         "lumen": args.lumen},
        [path],
    )
    return 0


# -- serve ----------------------------------------------------------------------


def cmd_serve(args) -> int:
    out = _resolve_out(args.out)
    spec = load_scenario(args.scenario)
    if args.rate_hz <= 0:
        raise ScenarioError(f"--rate-hz must be positive, got {args.rate_hz}")
    if args.static is not None:
        static = Path(args.static)
        if not static.is_dir():
            raise ScenarioError(f"--static directory not found: {static}")
    else:
        default_console = Path("frontend") / "dist"
        static = default_console if default_console.is_dir() else None
    from .service import serve  # lazy: keeps the web stack optional elsewhere

    return serve(spec, host=args.host, port=args.port, rate_hz=args.rate_hz,
                 out_dir=out, static_dir=static)


if __name__ == "__main__":
    sys.exit(main())
