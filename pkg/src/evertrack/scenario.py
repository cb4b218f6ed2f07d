"""Scenario documents: one YAML file describing one run.

A scenario names a calibration (all physical constants live there), picks
a lumen (a packaged fixture by name, or an inline segment list), gives a
command schedule, and sets the simulation knobs.  The `robot:` block may
override individual calibration keys using the calibration file's own
layout, so a sweep over, say, guide compliance is a one-key document
change.

Keys carry explicit unit suffixes; unknown keys and out-of-range values
fail with the full key path.  Parsing is strict on purpose: a scenario
is a lab notebook entry, and a typo should never silently change units.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .calibration import (
    Calibration,
    boolean_at,
    document_digest,
    integer_at,
    load_calibration,
    load_yaml_document,
    mapping_at,
    number_at,
    numbers_at,
    reject_unknown_keys,
    resolve_calibration_path,
    string_at,
)
from .errors import ScenarioError
from .lumen import (
    Elbow,
    ElasticWall,
    LumenModel,
    LumenSegment,
    RigidWall,
    Straight,
    Waviness,
    paper_fixtures,
)
from .membrane import ChamberModel
from .navigation import Command, RobotModel, SimConfig, SimTrace, TimedCommand, run

_MISSING = object()
_RPM_TO_RADPS = 2.0 * 3.141592653589793 / 60.0


@dataclass(frozen=True)
class ScenarioSpec:
    """Fully resolved scenario: models built, schedule validated."""

    name: str
    calibration: Calibration
    lumen: LumenModel
    schedule: tuple[TimedCommand, ...]
    sim: SimConfig
    s0_mm: float
    exit_end: str
    document: dict

    @property
    def digest(self) -> str:
        """Content hash over the scenario and its resolved calibration."""
        return document_digest(self.document, self.calibration.document)

    def build_robot(self, chamber: ChamberModel | None = None) -> RobotModel:
        return self.calibration.build_robot(chamber)


def packaged_scenarios() -> tuple[str, ...]:
    """Names of the scenarios shipped inside the package."""
    root = resources.files("evertrack").joinpath("data/scenarios")
    names = [p.name[: -len(".yaml")] for p in root.iterdir()
             if p.name.endswith(".yaml")]
    return tuple(sorted(names))


def resolve_scenario_path(name_or_path: str | Path) -> Path:
    """Bare names resolve against the packaged scenarios directory."""
    text = str(name_or_path)
    if "/" in text or text.endswith((".yaml", ".yml")):
        return Path(text)
    packaged = resources.files("evertrack").joinpath(
        f"data/scenarios/{text}.yaml"
    )
    with resources.as_file(packaged) as concrete:
        if not concrete.exists():
            raise ScenarioError(
                f"no packaged scenario named '{text}' "
                f"(have: {', '.join(packaged_scenarios())})"
            )
        return Path(concrete)


def load_scenario(source: str | Path) -> ScenarioSpec:
    path = resolve_scenario_path(source)
    doc = load_yaml_document(path, "scenario")
    return scenario_from_document(doc, default_name=path.stem)


def scenario_from_document(doc: dict, *, default_name: str = "scenario") -> ScenarioSpec:
    reject_unknown_keys(
        doc, {"name", "calibration", "robot", "lumen", "schedule", "sim"},
        "scenario",
    )
    name = string_at(doc, "name", "scenario", default=default_name)

    cal_ref = doc.get("calibration")
    if cal_ref is None:
        raise ScenarioError(
            "scenario must reference a calibration by name or path "
            "(physical constants never default implicitly)",
            field="scenario.calibration",
        )
    if not isinstance(cal_ref, str):
        raise ScenarioError(
            f"scenario.calibration must be a name or path string, got {cal_ref!r}",
            field="scenario.calibration",
        )
    calibration = load_calibration(cal_ref)

    overrides = doc.get("robot")
    if overrides is not None:
        calibration = calibration.with_overrides(
            mapping_at(overrides, "scenario.robot"), "robot"
        )

    lumen = _parse_lumen(mapping_at(_require(doc, "lumen", "scenario"), "scenario.lumen"))
    sim_doc = mapping_at(doc.get("sim", {}), "scenario.sim")
    sim, s0_mm, exit_end = _parse_sim(sim_doc, calibration, lumen)
    schedule = _parse_schedule(doc.get("schedule"), calibration)

    return ScenarioSpec(
        name=name,
        calibration=calibration,
        lumen=lumen,
        schedule=schedule,
        sim=sim,
        s0_mm=s0_mm,
        exit_end=exit_end,
        document=doc,
    )


def run_scenario(source: str | Path | ScenarioSpec, *,
                 robot: RobotModel | None = None) -> SimTrace:
    """Resolve and run one scenario; deterministic for fixed inputs.

    Pass a prebuilt robot to share its membrane cache across runs; the
    caller owns making it consistent with the scenario's calibration.
    """
    spec = source if isinstance(source, ScenarioSpec) else load_scenario(source)
    if robot is None:
        robot = spec.build_robot()
    return run(spec.lumen, robot, list(spec.schedule), spec.sim,
               s0_mm=spec.s0_mm, exit_end=spec.exit_end)


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ScenarioError(f"missing required key {path}.{key}",
                            field=f"{path}.{key}")
    return doc[key]


# -- lumen block --------------------------------------------------------------


def _parse_lumen(doc: dict) -> LumenModel:
    if "fixture" in doc:
        reject_unknown_keys(doc, {"fixture"}, "lumen")
        name = string_at(doc, "fixture", "lumen")
        fixtures = paper_fixtures()
        if name not in fixtures:
            raise ScenarioError(
                f"unknown lumen fixture '{name}' "
                f"(have: {', '.join(sorted(fixtures))})",
                field="lumen.fixture",
            )
        return fixtures[name]

    reject_unknown_keys(
        doc,
        {"segments", "wall", "mu_wall", "supports_mm", "lubricated",
         "support_halfwidth_mm", "elbow_plane"},
        "lumen",
    )
    raw_segments = _require(doc, "segments", "lumen")
    if not isinstance(raw_segments, list) or not raw_segments:
        raise ScenarioError("lumen.segments must be a non-empty list",
                            field="lumen.segments")
    segments = tuple(
        _parse_segment(mapping_at(item, f"lumen.segments[{i}]"), i)
        for i, item in enumerate(raw_segments)
    )
    wall = _parse_wall(mapping_at(_require(doc, "wall", "lumen"), "lumen.wall"))
    try:
        return LumenModel(
            segments=segments,
            wall=wall,
            mu_wall=number_at(doc, "mu_wall", "lumen", minimum=1e-6),
            supports=numbers_at(doc, "supports_mm", "lumen", default=(), minimum=0.0),
            lubricated=boolean_at(doc, "lubricated", "lumen", default=False),
            support_halfwidth_mm=number_at(doc, "support_halfwidth_mm", "lumen",
                                           default=20.0, minimum=0.0),
            elbow_plane=string_at(doc, "elbow_plane", "lumen", default="horizontal",
                                  choices=("horizontal", "vertical")),
        )
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"lumen: {exc}", field="lumen") from exc


def _parse_segment(doc: dict, index: int) -> LumenSegment:
    path = f"lumen.segments[{index}]"
    reject_unknown_keys(doc, {"straight_mm", "elbow", "diameter_mm", "waviness"},
                        path)
    has_straight = "straight_mm" in doc
    has_elbow = "elbow" in doc
    if has_straight == has_elbow:
        raise ScenarioError(
            f"{path} needs exactly one of straight_mm or elbow", field=path
        )
    if has_straight:
        kind = Straight(number_at(doc, "straight_mm", path, minimum=1e-6))
    else:
        elbow = mapping_at(doc["elbow"], f"{path}.elbow")
        reject_unknown_keys(elbow, {"bend_radius_mm", "sweep_deg"}, f"{path}.elbow")
        kind = Elbow(
            bend_radius_mm=number_at(elbow, "bend_radius_mm", f"{path}.elbow",
                                     minimum=1e-6),
            sweep_deg=number_at(elbow, "sweep_deg", f"{path}.elbow",
                                minimum=1e-6, maximum=180.0),
        )
    waviness = Waviness()
    if "waviness" in doc:
        wdoc = mapping_at(doc["waviness"], f"{path}.waviness")
        reject_unknown_keys(wdoc, {"amplitude_mm", "period_mm"}, f"{path}.waviness")
        waviness = Waviness(
            amplitude_mm=number_at(wdoc, "amplitude_mm", f"{path}.waviness",
                                   minimum=0.0),
            period_mm=number_at(wdoc, "period_mm", f"{path}.waviness",
                                default=50.0, minimum=1e-6),
        )
    try:
        return LumenSegment(
            kind=kind,
            diameter_mm=number_at(doc, "diameter_mm", path, minimum=1e-6),
            waviness=waviness,
        )
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}", field=path) from exc


def _parse_wall(doc: dict):
    kind = string_at(doc, "kind", "lumen.wall", choices=("rigid", "elastic"))
    if kind == "rigid":
        reject_unknown_keys(doc, {"kind"}, "lumen.wall")
        return RigidWall()
    reject_unknown_keys(doc, {"kind", "hoop_stiffness_N_per_mm", "collapsed"},
                        "lumen.wall")
    return ElasticWall(
        hoop_stiffness_N_per_mm=number_at(doc, "hoop_stiffness_N_per_mm",
                                          "lumen.wall", minimum=1e-9),
        collapsed=boolean_at(doc, "collapsed", "lumen.wall", default=False),
    )


# -- schedule and sim blocks ---------------------------------------------------


def _parse_schedule(raw, calibration: Calibration) -> tuple[TimedCommand, ...]:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("scenario.schedule must be a non-empty list",
                            field="scenario.schedule")
    entries = []
    for i, item in enumerate(raw):
        path = f"schedule[{i}]"
        doc = mapping_at(item, path)
        reject_unknown_keys(doc, {"at_s", "motor_radps", "motor_rpm",
                                  "p1_kPa", "p2_kPa"}, path)
        at_s = number_at(doc, "at_s", path, minimum=0.0)
        has_radps = "motor_radps" in doc
        has_rpm = "motor_rpm" in doc
        if has_radps == has_rpm:
            raise ScenarioError(
                f"{path} needs exactly one of motor_radps or motor_rpm",
                field=path,
            )
        if has_radps:
            motor = number_at(doc, "motor_radps", path)
        else:
            motor = number_at(doc, "motor_rpm", path) * _RPM_TO_RADPS
        limit = calibration.gearhead.max_motor_speed_radps
        if abs(motor) > limit * (1.0 + 1e-9):
            raise ScenarioError(
                f"{path}: motor speed {motor:.1f} rad/s exceeds the "
                f"calibrated limit {limit:.1f} rad/s",
                field=path,
            )
        pressures = []
        for key in ("p1_kPa", "p2_kPa"):
            p = number_at(doc, key, path, minimum=0.0)
            if p > calibration.max_pressure_kPa:
                raise ScenarioError(
                    f"{path}.{key}: {p} kPa exceeds the calibrated limit "
                    f"{calibration.max_pressure_kPa} kPa",
                    field=f"{path}.{key}",
                )
            pressures.append(p)
        entries.append(TimedCommand(at_s, Command(motor, *pressures)))
    entries.sort(key=lambda tc: tc.time_s)
    if entries[0].time_s > 0.0:
        raise ScenarioError("schedule must contain an entry at at_s = 0.0",
                            field="schedule[0].at_s")
    return tuple(entries)


def _parse_sim(doc: dict, calibration: Calibration,
               lumen: LumenModel) -> tuple[SimConfig, float, str]:
    reject_unknown_keys(
        doc,
        {"dt_s", "gravity", "max_steps", "stall_patience_s", "start_mm",
         "exit_end"},
        "sim",
    )
    try:
        sim = SimConfig(
            dt_s=number_at(doc, "dt_s", "sim", default=0.05, minimum=1e-4),
            tether=calibration.tether,
            gravity=boolean_at(doc, "gravity", "sim", default=True),
            slip_exponent=calibration.slip_exponent,
            max_steps=integer_at(doc, "max_steps", "sim", default=20000, minimum=1),
            stall_patience_s=number_at(doc, "stall_patience_s", "sim",
                                       default=5.0, minimum=1e-3),
        )
    except ValueError as exc:
        raise ScenarioError(f"sim: {exc}", field="sim") from exc
    s0 = number_at(doc, "start_mm", "sim", default=0.0, minimum=0.0)
    if s0 > lumen.total_length_mm:
        raise ScenarioError(
            f"sim.start_mm {s0} lies beyond the lumen end "
            f"{lumen.total_length_mm:.2f}",
            field="sim.start_mm",
        )
    exit_end = string_at(doc, "exit_end", "sim", default="far",
                         choices=("far", "near"))
    return sim, s0, exit_end
