"""Quasi-static navigation of the robot along a lumen.

Each step resolves the cross-section contact at the robot's current
arclength, prices the resistance against the available traction, applies
a slip law and advances.  No inertia: the robot is slow enough that
every instant is a force balance.

Resistance model: the only rolling surfaces are the track faces, so
whatever else the wall touches drags.  Rubbing is priced as a hug
fraction of the total track normal load times the wall friction
(lubrication discounts resistive friction only, never traction), plus a
constant plow term where a soft wall is pushed ahead of the nose, plus
tether drag that accrues per elbow pulled through (capped), plus the
weight component along the climb.  In a collapsed lumen the drape's
preload and stretch already appear in the normal load, so its rub is the
hug term of that load; the hug fraction stays below one because the
nose everts the drape open as the robot advances.  Moving tail-first
plows less, which is why the bench runs measure a faster backward speed.

Units: mm, s, N, kPa; speeds mm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.optimize import brentq

from .contact import (
    ContactState,
    RobotGeometry,
    TrackSet,
    TractionResult,
    equilibrium_contact,
    traction,
)
from .errors import StepError
from .lumen import ElasticWall, LumenModel, RigidWall
from .membrane import ChamberModel
from .transmission import TransmissionForces, robot_speed


@dataclass(frozen=True)
class ResistanceModel:
    """Sliding-drag coefficients per wall behaviour, fitted once.

    hug fractions say how much of the track normal load also rubs
    non-rolling surfaces; the collapsed fraction covers the opened drape
    wrapped around the body.  plow_N is the steady force of deforming a
    soft supported wall ahead of the nose; going backward the tail
    smooths instead of plowing, scaling both soft-wall terms down.
    """

    hug_fraction_rigid: float = 0.05
    hug_fraction_elastic: float = 0.33
    hug_fraction_collapsed: float = 0.60
    plow_N: float = 0.10
    backward_factor: float = 0.78
    lubrication_factor: float = 0.6

    def __post_init__(self):
        for name in (
            "hug_fraction_rigid",
            "hug_fraction_elastic",
            "hug_fraction_collapsed",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.plow_N < 0:
            raise ValueError(f"plow_N must be >= 0, got {self.plow_N}")
        if not 0.0 < self.backward_factor <= 1.0:
            raise ValueError(
                f"backward_factor must lie in (0, 1], got {self.backward_factor}"
            )
        if not 0.0 < self.lubrication_factor <= 1.0:
            raise ValueError(
                f"lubrication_factor must lie in (0, 1], got {self.lubrication_factor}"
            )


@dataclass(frozen=True)
class RobotModel:
    """Everything the stepper needs to know about the robot itself."""

    chamber: ChamberModel
    tracks: TrackSet
    geometry: RobotGeometry
    forces: TransmissionForces
    pitch_mm: float
    max_motor_speed_radps: float
    gear_ratio: float
    collapse_preload_N: float = 0.6
    drape_stiffness_N_per_mm: float = 0.0185
    bench_stiffness_N_per_mm: float = 2.0
    resistance: ResistanceModel = field(default_factory=ResistanceModel)
    pressure_quantum_kPa: float = 0.25

    def __post_init__(self):
        if self.pitch_mm <= 0:
            raise ValueError(f"pitch_mm must be positive, got {self.pitch_mm}")
        if self.max_motor_speed_radps <= 0:
            raise ValueError("max_motor_speed_radps must be positive")
        if self.gear_ratio < 1:
            raise ValueError(f"gear_ratio must be >= 1, got {self.gear_ratio}")
        if self.collapse_preload_N < 0:
            raise ValueError("collapse_preload_N must be >= 0")
        if self.drape_stiffness_N_per_mm <= 0:
            raise ValueError("drape_stiffness_N_per_mm must be positive")
        if self.bench_stiffness_N_per_mm <= 0:
            raise ValueError("bench_stiffness_N_per_mm must be positive")
        if self.pressure_quantum_kPa <= 0:
            raise ValueError("pressure_quantum_kPa must be positive")

    def quantize_pressure(self, p_kPa: float) -> float:
        """Snap a commanded pressure onto the membrane cache grid."""
        q = self.pressure_quantum_kPa
        return round(round(p_kPa / q) * q, 9)

    def track_speed_mmps(self, motor_speed_radps: float) -> float:
        return robot_speed(motor_speed_radps / self.gear_ratio, self.pitch_mm)


@dataclass(frozen=True)
class Command:
    """Operator setpoints held between schedule boundaries."""

    motor_speed_radps: float
    p1_kPa: float
    p2_kPa: float


@dataclass(frozen=True)
class TimedCommand:
    time_s: float
    command: Command


@dataclass(frozen=True)
class TetherModel:
    """Umbilical drag: linear in elbows pulled through, saturating."""

    drag_per_flexure_N: float = 0.1
    cap_N: float = 4.0

    def __post_init__(self):
        if self.drag_per_flexure_N < 0:
            raise ValueError("drag_per_flexure_N must be >= 0")
        if self.cap_N < 0:
            raise ValueError("cap_N must be >= 0")

    def drag_N(self, elbows_passed: int) -> float:
        return min(self.drag_per_flexure_N * elbows_passed, self.cap_N)


@dataclass(frozen=True)
class SimConfig:
    dt_s: float = 0.05
    tether: TetherModel = field(default_factory=TetherModel)
    gravity: bool = True
    slip_exponent: float = 2.0
    max_steps: int = 20000
    stall_patience_s: float = 5.0

    def __post_init__(self):
        if self.dt_s <= 0:
            raise ValueError(f"dt_s must be positive, got {self.dt_s}")
        if self.slip_exponent < 1:
            raise ValueError(
                f"slip_exponent must be >= 1, got {self.slip_exponent}"
            )
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.stall_patience_s <= 0:
            raise ValueError("stall_patience_s must be positive")


@dataclass(frozen=True)
class RobotState:
    s_mm: float
    v_mmps: float
    tilt_deg: float
    pressures_kPa: tuple[float, float]
    motor_speed_radps: float
    stalled: bool


@dataclass(frozen=True)
class TraceRow:
    time_s: float
    state: RobotState
    traction: TractionResult
    contact: ContactState


@dataclass(frozen=True)
class SimTrace:
    rows: tuple[TraceRow, ...]
    summary: dict

    CSV_HEADER = "time_s,s_mm,v_mmps,tilt_deg,p1_kPa,p2_kPa,traction_N,contacts"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for row in self.rows:
            st = row.state
            lines.append(
                f"{row.time_s:.6f},{st.s_mm:.6f},{st.v_mmps:.6f},"
                f"{st.tilt_deg:.6f},{st.pressures_kPa[0]:.6f},"
                f"{st.pressures_kPa[1]:.6f},"
                f"{row.traction.available_traction_N:.6f},"
                f"{row.contact.tracks_in_contact}"
            )
        return "\n".join(lines) + "\n"


def summarize(rows: tuple[TraceRow, ...], completed: bool,
              termination: str = "exit") -> dict:
    """Run summary recomputable from the sampled rows alone."""
    if not rows:
        return {
            "completed": completed,
            "termination": termination,
            "distance_mm": 0.0,
            "elapsed_s": 0.0,
            "final_s_mm": 0.0,
            "mean_speed_mmps": 0.0,
            "stall_events": 0,
            "steps": 0,
        }
    distance = rows[-1].state.s_mm - rows[0].state.s_mm
    elapsed = rows[-1].time_s - rows[0].time_s
    stall_events = 0
    was_stalled = False
    for row in rows:
        if row.state.stalled and not was_stalled:
            stall_events += 1
        was_stalled = row.state.stalled
    return {
        "completed": completed,
        "termination": termination,
        "distance_mm": distance,
        "elapsed_s": elapsed,
        "final_s_mm": rows[-1].state.s_mm,
        "mean_speed_mmps": distance / elapsed if elapsed > 0 else 0.0,
        "stall_events": stall_events,
        "steps": len(rows),
    }


def _wall_params(lumen: LumenModel, s_mm: float) -> tuple[float, bool]:
    """Local wall stiffness (inf for rigid or near a support) and collapse."""
    if isinstance(lumen.wall, RigidWall):
        return math.inf, False
    if lumen.near_support(s_mm):
        return math.inf, False
    wall: ElasticWall = lumen.wall
    return wall.hoop_stiffness_N_per_mm, wall.collapsed


def resolve_contact(
    robot: RobotModel,
    lumen: LumenModel,
    s_mm: float,
    pressures_kPa: tuple[float, float],
    gravity: bool,
) -> ContactState:
    """Cross-section contact at arclength s with cache-friendly pressures."""
    p1 = robot.quantize_pressure(pressures_kPa[0])
    p2 = robot.quantize_pressure(pressures_kPa[1])
    wall_k, collapsed = _wall_params(lumen, s_mm)
    if collapsed:
        wall_k = robot.drape_stiffness_N_per_mm
    return equilibrium_contact(
        (p1, p2),
        lumen.local_radius(s_mm),
        wall_k,
        robot.tracks,
        robot.chamber,
        geometry=robot.geometry,
        gravity=gravity,
        collapsed=collapsed,
        collapse_preload_N=robot.collapse_preload_N if collapsed else 0.0,
        bench_stiffness_N_per_mm=robot.bench_stiffness_N_per_mm,
    )


def resistance_N(
    robot: RobotModel,
    lumen: LumenModel,
    contact: ContactState,
    s_mm: float,
    s_start_mm: float,
    direction: float,
    tether: TetherModel,
    gravity: bool,
) -> float:
    """Force opposing motion in the given direction (clamped at zero).

    Hug and plow resist either way (scaled down tail-first on soft
    walls); tether drag counts elbows between the start position and
    here; gravity enters through the local slope and may help, never
    past the point of free-rolling.
    """
    res = robot.resistance
    mu_eff = lumen.mu_wall * (
        res.lubrication_factor if lumen.lubricated else 1.0
    )
    if isinstance(lumen.wall, RigidWall):
        hug = res.hug_fraction_rigid
        plow = 0.0
    elif lumen.collapsed:
        hug = res.hug_fraction_collapsed
        plow = 0.0
    else:
        hug = res.hug_fraction_elastic
        plow = res.plow_N
    drag = hug * mu_eff * contact.total_normal_N + plow
    if direction < 0 and not isinstance(lumen.wall, RigidWall):
        drag *= res.backward_factor
    drag += tether.drag_N(lumen.elbows_passed(s_start_mm, s_mm))
    if gravity:
        drag += robot.geometry.weight_N * lumen.slope_sin(s_mm) * direction
    return max(drag, 0.0)


def step(
    state: RobotState,
    command: Command,
    lumen: LumenModel,
    robot: RobotModel,
    config: SimConfig,
    *,
    s_start_mm: float | None = None,
) -> tuple[RobotState, TraceRow | None]:
    """Advance one quasi-static step; the row carries the resolved forces.

    The returned row is None only for a parked robot (zero motor
    command), where no contact resolve is needed to know nothing moves.
    """
    p1 = max(command.p1_kPa, 0.0)
    p2 = max(command.p2_kPa, 0.0)
    motor = command.motor_speed_radps
    if abs(motor) > robot.max_motor_speed_radps * (1 + 1e-9):
        raise ValueError(
            f"motor speed {motor} exceeds limit {robot.max_motor_speed_radps}"
        )
    start = state.s_mm if s_start_mm is None else s_start_mm
    contact = resolve_contact(robot, lumen, state.s_mm, (p1, p2), config.gravity)
    v_track = robot.track_speed_mmps(motor)
    if v_track == 0.0:
        new = replace(
            state,
            v_mmps=0.0,
            tilt_deg=contact.tilt_deg,
            pressures_kPa=(p1, p2),
            motor_speed_radps=motor,
            stalled=False,
        )
        return new, None

    direction = math.copysign(1.0, v_track)
    required = resistance_N(
        robot, lumen, contact, state.s_mm, start, direction, config.tether,
        config.gravity,
    )
    pull = traction(contact, robot.tracks, robot.forces, required_force_N=required)
    if pull.stalled or pull.available_traction_N <= required:
        speed = 0.0
        stalled = True
    else:
        slip = (required / pull.available_traction_N) ** config.slip_exponent
        speed = abs(v_track) * (1.0 - slip)
        speed = min(max(speed, 0.0), abs(v_track))
        stalled = False
    v = direction * speed
    s_new = min(max(state.s_mm + v * config.dt_s, 0.0), lumen.total_length_mm)
    new = RobotState(
        s_mm=s_new,
        v_mmps=v,
        tilt_deg=contact.tilt_deg,
        pressures_kPa=(p1, p2),
        motor_speed_radps=motor,
        stalled=stalled,
    )
    return new, TraceRow(time_s=0.0, state=new, traction=pull, contact=contact)


def run(
    lumen: LumenModel,
    robot: RobotModel,
    schedule: list[TimedCommand],
    config: SimConfig,
    *,
    s0_mm: float = 0.0,
    exit_end: str = "far",
) -> SimTrace:
    """Step the robot until it exits, stalls persistently, or times out.

    The schedule holds commands until the next boundary; it must start
    at or before t = 0.  `exit_end` names which lumen end counts as
    completion ("far" or "near") so backward runs terminate too.
    """
    if not schedule:
        raise ValueError("schedule must contain at least one command")
    sched = sorted(schedule, key=lambda tc: tc.time_s)
    if sched[0].time_s > 0:
        raise ValueError("schedule must cover t = 0")
    if exit_end not in ("far", "near"):
        raise ValueError(f"exit_end must be far|near, got {exit_end}")
    if not 0 <= s0_mm <= lumen.total_length_mm:
        raise ValueError(f"s0_mm {s0_mm} outside the lumen")

    state = RobotState(
        s_mm=s0_mm,
        v_mmps=0.0,
        tilt_deg=0.0,
        pressures_kPa=(
            max(sched[0].command.p1_kPa, 0.0),
            max(sched[0].command.p2_kPa, 0.0),
        ),
        motor_speed_radps=0.0,
        stalled=False,
    )
    rows: list[TraceRow] = []
    t = 0.0
    stalled_for = 0.0
    completed = False
    cmd_idx = 0
    for i in range(config.max_steps):
        while cmd_idx + 1 < len(sched) and sched[cmd_idx + 1].time_s <= t:
            cmd_idx += 1
        try:
            state, row = step(
                state, sched[cmd_idx].command, lumen, robot, config,
                s_start_mm=s0_mm,
            )
        except Exception as exc:  # noqa: BLE001 - annotate with the step index
            raise StepError(f"step {i} at s={state.s_mm:.3f} mm failed: {exc}",
                            step_index=i) from exc
        t += config.dt_s
        if row is not None:
            row = replace(row, time_s=t)
        else:
            # parked: synthesize a row so the trace stays dense in time
            contact = resolve_contact(
                robot, lumen, state.s_mm, state.pressures_kPa, config.gravity
            )
            pull = traction(contact, robot.tracks, robot.forces)
            row = TraceRow(time_s=t, state=state, traction=pull, contact=contact)
        rows.append(row)
        if (exit_end == "far" and state.s_mm >= lumen.total_length_mm) or (
            exit_end == "near" and state.s_mm <= 0.0 and state.v_mmps < 0.0
        ):
            completed = True
            termination = "exit"
            break
        stalled_for = stalled_for + config.dt_s if state.stalled else 0.0
        if stalled_for > config.stall_patience_s:
            termination = "stall"
            break
    else:
        termination = "max_steps"
    return SimTrace(
        rows=tuple(rows), summary=summarize(tuple(rows), completed, termination)
    )


def traction_sweep(
    robot: RobotModel,
    lumen: LumenModel,
    pressures_kPa: tuple[float, ...] = (0.0, 5.0, 10.0, 13.0, 16.0),
    *,
    anchor_s_mm: float = 120.0,
    gravity: bool = True,
) -> list[dict]:
    """Static pull test: hold the robot and report available traction.

    Mirrors anchoring the robot to a load cell at a fixed station and
    inflating both chambers to each listed pressure.
    """
    rows = []
    for p in pressures_kPa:
        contact = resolve_contact(robot, lumen, anchor_s_mm, (p, p), gravity)
        pull = traction(contact, robot.tracks, robot.forces)
        rows.append(
            {
                "pressure_kPa": p,
                "traction_N": pull.available_traction_N,
                "total_normal_N": contact.total_normal_N,
                "tracks_in_contact": contact.tracks_in_contact,
                "stalled": pull.stalled,
            }
        )
    return rows


def stall_pressure_kPa(
    robot: RobotModel,
    lumen: LumenModel,
    *,
    start_kPa: float = 16.0,
    step_kPa: float = 0.25,
    limit_kPa: float = 30.0,
    anchor_s_mm: float = 120.0,
) -> float | None:
    """First common pressure at which the anchored robot reads stalled.

    Scans upward from start_kPa; stops at the membrane's own safety cap
    if that comes first (returning None: no stall below the cap).
    """
    from .errors import MembraneError

    p = start_kPa
    while p <= limit_kPa:
        try:
            contact = resolve_contact(robot, lumen, anchor_s_mm, (p, p), True)
        except MembraneError:
            return None
        pull = traction(contact, robot.tracks, robot.forces)
        if pull.stalled:
            return p
        p = round(p + step_kPa, 9)
    return None


def matched_inflation_kPa(
    robot: RobotModel,
    lumen_radius_mm: float,
    *,
    interference_mm: float = 1.0,
    max_kPa: float = 22.0,
) -> float:
    """Pressure that seats the tracks on a rigid wall of the given radius.

    Solves free robot radius = lumen radius + interference; raises if the
    pipe is out of reach below max_kPa.
    """
    target = lumen_radius_mm + interference_mm
    geo = robot.geometry

    def gap(p: float) -> float:
        return robot.chamber.free_radius_mm(p) + geo.track_thickness_mm - target

    lo, hi = gap(0.0), gap(max_kPa)
    if lo >= 0:
        return 0.0
    if hi < 0:
        raise ValueError(
            f"lumen radius {lumen_radius_mm} mm out of inflation reach"
        )
    return brentq(gap, 0.0, max_kPa, xtol=1e-6)


def run_scenario(source, *, robot: RobotModel | None = None) -> SimTrace:
    """Run a scenario by name, path, or resolved spec.

    Thin forward to the scenario loader; lives here so callers that only
    think in terms of runs never import the document layer directly.
    """
    from .scenario import run_scenario as _run_scenario

    return _run_scenario(source, robot=robot)
