"""Stepper, run loop, and bench procedures built on top of the contact layer.

Membrane solves are the expensive part, so every test here sticks to a
small set of pressures that the rest of the suite also uses; the
session-scoped robot fixture shares one solution cache across files.
"""

import math
from dataclasses import replace

import pytest

from evertrack.errors import StepError
from evertrack.lumen import Elbow, LumenModel, LumenSegment, RigidWall, Straight
from evertrack.membrane import ChamberModel
from evertrack.navigation import (
    Command,
    ResistanceModel,
    RobotModel,
    SimConfig,
    SimTrace,
    TetherModel,
    TimedCommand,
    matched_inflation_kPa,
    resistance_N,
    resolve_contact,
    run,
    stall_pressure_kPa,
    step,
    summarize,
    traction_sweep,
)

FULL_SPEED_MMPS = 4.6875  # 12000 RPM motor through 256:1 onto a 6 mm pitch


@pytest.fixture(scope="module")
def pipe84(fixtures):
    return fixtures["pipe84"]


@pytest.fixture(scope="module")
def phantom(fixtures):
    return fixtures["phantom_supported"]


@pytest.fixture(scope="module")
def phantom_collapsed(fixtures):
    return fixtures["phantom_collapsed"]


@pytest.fixture(scope="module")
def quiet_config():
    # no tether drag so force bookkeeping stays hand-checkable
    return SimConfig(tether=TetherModel(0.0, 0.0))


@pytest.fixture(scope="module")
def slippery_robot(robot):
    """Same robot, no track grip: stalls against any resistance."""
    return replace(robot, tracks=replace(robot.tracks, mu_track_lumen=0.0))


@pytest.fixture(scope="module")
def small_robot(robot, calibration):
    """Coarse-mesh chamber for procedures that solve at off-grid pressures."""
    chamber = ChamberModel(
        replace(calibration.profile, n_nodes=48),
        calibration.material,
        robot.chamber.options,
    )
    return replace(robot, chamber=chamber)


def _full_command(robot, p_kPa):
    return Command(robot.max_motor_speed_radps, p_kPa, p_kPa)


def _parked(state_s, p=(5.0, 5.0)):
    from evertrack.navigation import RobotState

    return RobotState(
        s_mm=state_s,
        v_mmps=0.0,
        tilt_deg=0.0,
        pressures_kPa=p,
        motor_speed_radps=0.0,
        stalled=False,
    )


# ---------------------------------------------------------------- models


def test_resistance_model_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        ResistanceModel(hug_fraction_rigid=-0.1)
    with pytest.raises(ValueError):
        ResistanceModel(hug_fraction_elastic=1.2)
    with pytest.raises(ValueError):
        ResistanceModel(plow_N=-1.0)
    with pytest.raises(ValueError):
        ResistanceModel(backward_factor=0.0)
    with pytest.raises(ValueError):
        ResistanceModel(lubrication_factor=1.5)


def test_robot_model_rejects_bad_parameters(robot):
    with pytest.raises(ValueError):
        replace(robot, pitch_mm=0.0)
    with pytest.raises(ValueError):
        replace(robot, gear_ratio=0.5)
    with pytest.raises(ValueError):
        replace(robot, pressure_quantum_kPa=0.0)
    with pytest.raises(ValueError):
        replace(robot, drape_stiffness_N_per_mm=0.0)


def test_tether_drag_linear_then_capped():
    tether = TetherModel(drag_per_flexure_N=0.1, cap_N=0.25)
    assert tether.drag_N(0) == 0.0
    assert tether.drag_N(1) == pytest.approx(0.1)
    assert tether.drag_N(2) == pytest.approx(0.2)
    assert tether.drag_N(3) == pytest.approx(0.25)  # saturated
    assert tether.drag_N(50) == pytest.approx(0.25)
    drags = [tether.drag_N(k) for k in range(10)]
    assert all(b >= a for a, b in zip(drags, drags[1:]))


def test_tether_model_rejects_negatives():
    with pytest.raises(ValueError):
        TetherModel(drag_per_flexure_N=-0.1)
    with pytest.raises(ValueError):
        TetherModel(cap_N=-1.0)


def test_sim_config_rejects_bad_values():
    with pytest.raises(ValueError):
        SimConfig(dt_s=0.0)
    with pytest.raises(ValueError):
        SimConfig(slip_exponent=0.5)
    with pytest.raises(ValueError):
        SimConfig(max_steps=0)
    with pytest.raises(ValueError):
        SimConfig(stall_patience_s=0.0)


def test_pressure_quantization_snaps_to_grid(robot):
    assert robot.quantize_pressure(11.4) == pytest.approx(11.5)
    assert robot.quantize_pressure(11.37) == pytest.approx(11.25)
    assert robot.quantize_pressure(0.0) == 0.0
    q = robot.pressure_quantum_kPa
    for raw in (0.01, 3.3, 7.9, 19.87):
        snapped = robot.quantize_pressure(raw)
        assert abs(snapped - raw) <= q / 2 + 1e-12
        assert snapped == pytest.approx(round(snapped / q) * q)


def test_track_speed_follows_transmission(robot):
    v = robot.track_speed_mmps(robot.max_motor_speed_radps)
    assert v == pytest.approx(FULL_SPEED_MMPS, abs=1e-9)
    assert robot.track_speed_mmps(-robot.max_motor_speed_radps) == -v
    assert robot.track_speed_mmps(0.0) == 0.0


# ---------------------------------------------------------------- step


def test_parked_motor_holds_position(robot, pipe84, quiet_config):
    state = _parked(150.0)
    cmd = Command(0.0, 5.0, 5.0)
    new, row = step(state, cmd, pipe84, robot, quiet_config)
    assert row is None
    assert new.s_mm == state.s_mm
    assert new.v_mmps == 0.0
    assert not new.stalled
    assert new.pressures_kPa == (5.0, 5.0)
    assert new.tilt_deg == 0.0  # equal pressures, level pipe


def test_free_running_speed_tracks_the_motor(robot, pipe84, quiet_config):
    state = _parked(150.0, p=(11.5, 11.5))
    new, row = step(state, _full_command(robot, 11.5), pipe84, robot, quiet_config)
    assert row is not None
    assert row.state is new
    assert not new.stalled
    assert new.v_mmps == pytest.approx(FULL_SPEED_MMPS, rel=0.02)
    assert new.s_mm == pytest.approx(
        state.s_mm + new.v_mmps * quiet_config.dt_s, abs=1e-12
    )


def test_speed_follows_the_slip_law(robot, phantom, quiet_config):
    # v = v_track * (1 - (required/available)^n), straight from the row
    state = _parked(100.0)
    new, row = step(state, _full_command(robot, 5.0), phantom, robot, quiet_config)
    assert not new.stalled
    req = row.traction.required_force_N
    avail = row.traction.available_traction_N
    assert 0.0 < req < avail
    expected = FULL_SPEED_MMPS * (
        1.0 - (req / avail) ** quiet_config.slip_exponent
    )
    assert new.v_mmps == pytest.approx(expected, rel=1e-12)


def test_speed_never_exceeds_track_speed(robot, pipe84, quiet_config):
    for motor_frac, p in [(1.0, 0.0), (0.5, 5.0), (1.0, 11.5), (-1.0, 11.5),
                          (-0.25, 16.0)]:
        motor = motor_frac * robot.max_motor_speed_radps
        state = _parked(200.0, p=(p, p))
        new, _ = step(state, Command(motor, p, p), pipe84, robot, quiet_config)
        assert abs(new.v_mmps) <= abs(robot.track_speed_mmps(motor)) + 1e-12


def test_no_grip_means_stall(slippery_robot, pipe84, quiet_config):
    state = _parked(150.0)
    new, row = step(
        state, _full_command(slippery_robot, 5.0), pipe84, slippery_robot,
        quiet_config,
    )
    assert new.stalled
    assert new.v_mmps == 0.0
    assert new.s_mm == state.s_mm
    assert row.traction.available_traction_N <= row.traction.required_force_N


def test_motor_limit_enforced(robot, pipe84, quiet_config):
    state = _parked(150.0)
    over = Command(robot.max_motor_speed_radps * 1.01, 5.0, 5.0)
    with pytest.raises(ValueError, match="motor speed"):
        step(state, over, pipe84, robot, quiet_config)


def test_negative_commanded_pressures_clamp_to_zero(robot, pipe84, quiet_config):
    state = _parked(150.0)
    new, _ = step(
        state, Command(robot.max_motor_speed_radps, -3.0, -1.0), pipe84, robot,
        quiet_config,
    )
    assert new.pressures_kPa == (0.0, 0.0)


def test_position_clamps_at_the_far_end(robot, pipe84, quiet_config):
    L = pipe84.total_length_mm
    state = _parked(L - 0.01, p=(11.5, 11.5))
    new, _ = step(state, _full_command(robot, 11.5), pipe84, robot, quiet_config)
    assert new.s_mm == L


def test_direction_symmetry_in_a_level_rigid_pipe(robot, pipe84, quiet_config):
    # rigid wall: no backward factor, no slope, no elbows -> exact mirror
    fwd, _ = step(
        _parked(150.0, p=(11.5, 11.5)), _full_command(robot, 11.5), pipe84,
        robot, quiet_config,
    )
    cmd_back = Command(-robot.max_motor_speed_radps, 11.5, 11.5)
    bwd, _ = step(
        _parked(150.0, p=(11.5, 11.5)), cmd_back, pipe84, robot, quiet_config,
    )
    assert bwd.v_mmps == -fwd.v_mmps


# ---------------------------------------------------------------- resistance


def test_rigid_wall_resistance_is_direction_blind(robot, pipe84, quiet_config):
    contact = resolve_contact(robot, pipe84, 150.0, (11.5, 11.5), True)
    fwd = resistance_N(robot, pipe84, contact, 150.0, 150.0, +1.0,
                       quiet_config.tether, True)
    bwd = resistance_N(robot, pipe84, contact, 150.0, 150.0, -1.0,
                       quiet_config.tether, True)
    assert fwd == pytest.approx(bwd, rel=1e-12)
    assert fwd > 0.0


def test_soft_wall_backward_factor_applies(robot, phantom, quiet_config):
    contact = resolve_contact(robot, phantom, 100.0, (5.0, 5.0), True)
    fwd = resistance_N(robot, phantom, contact, 100.0, 100.0, +1.0,
                       quiet_config.tether, True)
    bwd = resistance_N(robot, phantom, contact, 100.0, 100.0, -1.0,
                       quiet_config.tether, True)
    assert bwd == pytest.approx(fwd * robot.resistance.backward_factor,
                                rel=1e-12)


def test_tether_drag_counts_elbows_from_the_start(robot, phantom, quiet_config):
    contact = resolve_contact(robot, phantom, 100.0, (5.0, 5.0), True)
    tether = TetherModel(drag_per_flexure_N=0.5, cap_N=4.0)
    base = resistance_N(robot, phantom, contact, 450.0, 0.0, +1.0,
                        quiet_config.tether, True)
    towed = resistance_N(robot, phantom, contact, 450.0, 0.0, +1.0, tether, True)
    assert phantom.elbows_passed(0.0, 450.0) == 1
    assert towed - base == pytest.approx(0.5, rel=1e-12)


def test_slope_adds_weight_one_way_and_clamps_the_other(robot, quiet_config):
    riser = LumenModel(
        segments=(
            LumenSegment(Straight(100.0), 84.0),
            LumenSegment(Elbow(bend_radius_mm=75.0, sweep_deg=90.0), 84.0),
            LumenSegment(Straight(100.0), 84.0),
        ),
        wall=RigidWall(),
        mu_wall=0.3,
        elbow_plane="vertical",
    )
    s_top = riser.total_length_mm - 50.0
    assert riser.slope_sin(s_top) == pytest.approx(1.0, abs=1e-9)
    contact = resolve_contact(robot, riser, s_top, (5.0, 5.0), True)
    up = resistance_N(robot, riser, contact, s_top, s_top, +1.0,
                      quiet_config.tether, True)
    down = resistance_N(robot, riser, contact, s_top, s_top, -1.0,
                        quiet_config.tether, True)
    hug = (robot.resistance.hug_fraction_rigid * riser.mu_wall
           * contact.total_normal_N)
    assert up == pytest.approx(hug + robot.geometry.weight_N, rel=1e-9)
    assert down == 0.0  # gravity helps more than friction resists


# ---------------------------------------------------------------- contact glue


def test_resolve_contact_quantizes_pressures(robot, pipe84):
    snapped = resolve_contact(robot, pipe84, 150.0, (11.5, 11.5), True)
    raw = resolve_contact(robot, pipe84, 150.0, (11.4, 11.6), True)
    assert raw == snapped


def test_support_ring_pins_the_wall(robot, phantom):
    s_ring = phantom.supports[1]
    s_free = 100.0
    assert phantom.near_support(s_ring)
    assert not phantom.near_support(s_free)
    pinned = resolve_contact(robot, phantom, s_ring, (16.0, 16.0), True)
    soft = resolve_contact(robot, phantom, s_free, (16.0, 16.0), True)
    assert pinned.effective_radius_mm == pytest.approx(
        phantom.local_radius(s_ring), abs=1e-9
    )
    assert soft.effective_radius_mm > phantom.local_radius(s_free)


# ---------------------------------------------------------------- run loop


def test_run_reaches_the_far_end(robot, pipe84, quiet_config):
    schedule = [TimedCommand(0.0, _full_command(robot, 11.5))]
    trace = run(pipe84, robot, schedule, quiet_config, s0_mm=500.0)
    s = trace.summary
    assert s["completed"] is True
    assert s["termination"] == "exit"
    assert s["final_s_mm"] >= pipe84.total_length_mm
    assert s["mean_speed_mmps"] == pytest.approx(FULL_SPEED_MMPS, rel=0.15)
    assert s["stall_events"] == 0
    times = [row.time_s for row in trace.rows]
    assert times[0] == pytest.approx(quiet_config.dt_s)
    steps_dt = [b - a for a, b in zip(times, times[1:])]
    assert all(d == pytest.approx(quiet_config.dt_s, rel=1e-9) for d in steps_dt)


def test_run_exits_the_near_end_backward(robot, pipe84, quiet_config):
    cmd = Command(-robot.max_motor_speed_radps, 11.5, 11.5)
    trace = run(pipe84, robot, [TimedCommand(0.0, cmd)], quiet_config,
                s0_mm=80.0, exit_end="near")
    s = trace.summary
    assert s["completed"] is True
    assert s["termination"] == "exit"
    assert s["final_s_mm"] == 0.0
    assert s["mean_speed_mmps"] < 0.0
    # distance is row-to-row; the first row sits one step past s0 already
    assert s["distance_mm"] == (trace.rows[-1].state.s_mm
                                - trace.rows[0].state.s_mm)
    assert s["distance_mm"] == pytest.approx(-80.0, abs=FULL_SPEED_MMPS * 0.05)


def test_run_is_deterministic(robot, pipe84, quiet_config):
    schedule = [TimedCommand(0.0, _full_command(robot, 11.5))]
    a = run(pipe84, robot, schedule, quiet_config, s0_mm=520.0)
    b = run(pipe84, robot, schedule, quiet_config, s0_mm=520.0)
    assert a.summary == b.summary
    assert a.to_csv() == b.to_csv()


def test_schedule_switches_commands_at_boundaries(robot, pipe84):
    config = SimConfig(tether=TetherModel(0.0, 0.0), max_steps=60)
    schedule = [
        TimedCommand(0.0, Command(0.0, 5.0, 5.0)),
        TimedCommand(1.0, _full_command(robot, 11.5)),
    ]
    trace = run(pipe84, robot, schedule, config, s0_mm=300.0)
    for row in trace.rows:
        if row.time_s <= 1.0:
            assert row.state.v_mmps == 0.0
            assert row.state.pressures_kPa == (5.0, 5.0)
        elif row.time_s > 1.0 + config.dt_s:
            assert row.state.v_mmps > 0.0
    # parked rows are synthesized: the trace has no time gaps
    assert len(trace.rows) == 60
    assert trace.summary["termination"] == "max_steps"


def test_persistent_stall_ends_the_run(slippery_robot, pipe84):
    config = SimConfig(dt_s=0.25, stall_patience_s=1.0, max_steps=50,
                       tether=TetherModel(0.0, 0.0))
    schedule = [TimedCommand(0.0, _full_command(slippery_robot, 5.0))]
    trace = run(pipe84, slippery_robot, schedule, config, s0_mm=150.0)
    s = trace.summary
    assert s["termination"] == "stall"
    assert s["completed"] is False
    assert s["stall_events"] == 1
    assert s["distance_mm"] == 0.0
    # patience 1.0 s at dt 0.25 s: the fifth stalled row pushes past it
    assert s["steps"] == 5


def test_parked_run_times_out_densely(robot, pipe84):
    config = SimConfig(max_steps=8, tether=TetherModel(0.0, 0.0))
    schedule = [TimedCommand(0.0, Command(0.0, 5.0, 5.0))]
    trace = run(pipe84, robot, schedule, config, s0_mm=150.0)
    s = trace.summary
    assert s["termination"] == "max_steps"
    assert s["completed"] is False
    assert s["steps"] == 8
    assert s["distance_mm"] == 0.0
    assert s["mean_speed_mmps"] == 0.0
    assert all(row.contact.tracks_in_contact >= 1 for row in trace.rows)


def test_run_validates_inputs(robot, pipe84, quiet_config):
    cmd = TimedCommand(0.0, Command(0.0, 5.0, 5.0))
    with pytest.raises(ValueError, match="at least one command"):
        run(pipe84, robot, [], quiet_config)
    with pytest.raises(ValueError, match="cover t = 0"):
        run(pipe84, robot, [TimedCommand(1.0, cmd.command)], quiet_config)
    with pytest.raises(ValueError, match="exit_end"):
        run(pipe84, robot, [cmd], quiet_config, exit_end="sideways")
    with pytest.raises(ValueError, match="outside the lumen"):
        run(pipe84, robot, [cmd], quiet_config, s0_mm=-1.0)
    with pytest.raises(ValueError, match="outside the lumen"):
        run(pipe84, robot, [cmd], quiet_config,
            s0_mm=pipe84.total_length_mm + 1.0)


def test_step_failures_carry_the_step_index(robot, pipe84, quiet_config):
    over = Command(robot.max_motor_speed_radps * 2.0, 5.0, 5.0)
    with pytest.raises(StepError, match="step 0") as exc_info:
        run(pipe84, robot, [TimedCommand(0.0, over)], quiet_config)
    assert exc_info.value.step_index == 0


# ---------------------------------------------------------------- summaries


def test_summary_of_empty_rows_is_all_zero():
    s = summarize((), completed=False, termination="max_steps")
    assert s == {
        "completed": False,
        "termination": "max_steps",
        "distance_mm": 0.0,
        "elapsed_s": 0.0,
        "final_s_mm": 0.0,
        "mean_speed_mmps": 0.0,
        "stall_events": 0,
        "steps": 0,
    }


def test_stall_events_count_rising_edges(robot, pipe84):
    config = SimConfig(max_steps=6, tether=TetherModel(0.0, 0.0))
    schedule = [TimedCommand(0.0, Command(0.0, 5.0, 5.0))]
    rows = run(pipe84, robot, schedule, config, s0_mm=150.0).rows
    pattern = [True, True, False, True, False, True]
    synth = tuple(
        replace(row, state=replace(row.state, stalled=flag))
        for row, flag in zip(rows, pattern)
    )
    s = summarize(synth, completed=False, termination="stall")
    assert s["stall_events"] == 3


def test_summary_is_recomputable_from_rows(robot, pipe84, quiet_config):
    schedule = [TimedCommand(0.0, _full_command(robot, 11.5))]
    trace = run(pipe84, robot, schedule, quiet_config, s0_mm=550.0)
    again = summarize(trace.rows, trace.summary["completed"],
                      trace.summary["termination"])
    assert again == trace.summary


def test_csv_matches_the_documented_header(robot, pipe84):
    config = SimConfig(max_steps=3, tether=TetherModel(0.0, 0.0))
    schedule = [TimedCommand(0.0, Command(0.0, 5.0, 5.0))]
    trace = run(pipe84, robot, schedule, config, s0_mm=150.0)
    text = trace.to_csv()
    lines = text.splitlines()
    assert lines[0] == SimTrace.CSV_HEADER
    assert lines[0] == "time_s,s_mm,v_mmps,tilt_deg,p1_kPa,p2_kPa,traction_N,contacts"
    assert len(lines) == 1 + len(trace.rows)
    first = lines[1].split(",")
    assert len(first) == 8
    assert float(first[0]) == pytest.approx(config.dt_s)
    assert float(first[4]) == pytest.approx(5.0)
    assert int(first[7]) == trace.rows[0].contact.tracks_in_contact
    assert text.endswith("\n")


# ---------------------------------------------------------------- procedures


def test_traction_sweep_row_contract(robot, phantom_collapsed):
    rows = traction_sweep(robot, phantom_collapsed, (0.0, 5.0, 10.0))
    assert [r["pressure_kPa"] for r in rows] == [0.0, 5.0, 10.0]
    for r in rows:
        assert set(r) == {
            "pressure_kPa", "traction_N", "total_normal_N",
            "tracks_in_contact", "stalled",
        }
        assert r["tracks_in_contact"] == 6  # collapse drapes every track
        assert not r["stalled"]
    pulls = [r["traction_N"] for r in rows]
    assert pulls[0] > 0.0
    assert pulls == sorted(pulls)
    assert pulls[1] > pulls[0]
    assert pulls[2] > pulls[1]


def test_traction_sweep_empty_pressures(robot, phantom_collapsed):
    assert traction_sweep(robot, phantom_collapsed, ()) == []


def test_traction_sweep_without_grip_is_useless(slippery_robot,
                                                phantom_collapsed):
    rows = traction_sweep(slippery_robot, phantom_collapsed, (0.0, 5.0))
    for r in rows:
        assert r["traction_N"] == 0.0
        # stalled on the bench means a spent drivetrain budget, and the
        # drivetrain is fine; the robot just has nothing to push against
        assert not r["stalled"]
        assert r["total_normal_N"] > 0.0


def test_stall_scan_respects_its_limit(robot, phantom_collapsed):
    # internal drag at these pressures is still below the axial budget
    assert stall_pressure_kPa(robot, phantom_collapsed, limit_kPa=17.0) is None


def test_stall_scan_stops_at_the_membrane_cap(small_robot, calibration,
                                              phantom_collapsed):
    fragile = replace(
        small_robot,
        chamber=ChamberModel(
            replace(calibration.profile, n_nodes=48),
            calibration.material,
            replace(small_robot.chamber.options, stretch_cap=1.2),
        ),
    )
    assert stall_pressure_kPa(fragile, phantom_collapsed) is None


def test_matched_inflation_seats_on_the_wall(small_robot):
    p = matched_inflation_kPa(small_robot, 42.0, interference_mm=1.0)
    assert 5.0 < p < 20.0
    seated = (small_robot.chamber.free_radius_mm(p)
              + small_robot.geometry.track_thickness_mm)
    assert seated == pytest.approx(43.0, abs=1e-3)


def test_matched_inflation_zero_when_already_seated(small_robot):
    rest = (small_robot.chamber.free_radius_mm(0.0)
            + small_robot.geometry.track_thickness_mm)
    assert matched_inflation_kPa(small_robot, rest - 5.0) == 0.0


def test_matched_inflation_rejects_unreachable_pipes(small_robot):
    with pytest.raises(ValueError, match="out of inflation reach"):
        matched_inflation_kPa(small_robot, 80.0)
