"""Seat the robot in rigid pipes and drive it wall to wall.

Walks the three bench pipe diameters: finds the inflation that seats the
tracks with 1 mm of interference, quantizes it to the regulator grid,
then traverses 600 mm at full motor speed in both directions.  Expect
travel speeds a shade under the ideal 4.69 mm/s (slip under the tether
load) and zero forward/backward asymmetry on level rigid ground.

Ends with the steering primitive: inflating one chamber against the
other in the widest pipe tilts the chassis about ten degrees.

Run:  python3 demos/pipe_crawl.py        (about 10 s)
"""
from __future__ import annotations

import math

from evertrack import (
    Command,
    SimConfig,
    TimedCommand,
    load_calibration,
    matched_inflation_kPa,
    paper_fixtures,
    run,
    tilt_angle,
)


def traverse(robot, lumen, p_kPa, direction):
    s0 = 0.0 if direction > 0 else lumen.total_length_mm
    schedule = [TimedCommand(0.0, Command(
        direction * robot.max_motor_speed_radps, p_kPa, p_kPa))]
    trace = run(lumen, robot, schedule, SimConfig(), s0_mm=s0,
                exit_end="far" if direction > 0 else "near")
    return direction * trace.summary["mean_speed_mmps"], trace.summary


def main():
    cal = load_calibration()
    robot = cal.build_robot()
    fixtures = paper_fixtures()
    ideal = robot.track_speed_mmps(robot.max_motor_speed_radps)
    rpm = robot.max_motor_speed_radps * 60.0 / (2.0 * math.pi)
    print(f"ideal track speed {ideal:.4f} mm/s "
          f"({rpm:g} RPM motor through {robot.gear_ratio:g}:1 "
          f"onto a {robot.pitch_mm:g} mm pitch)")
    print()
    print("pipe   seat kPa   forward mm/s   backward mm/s   sim time s")
    for diameter in (74, 84, 94):
        lumen = fixtures[f"pipe{diameter}"]
        seat = robot.quantize_pressure(matched_inflation_kPa(
            robot, diameter / 2.0,
            interference_mm=cal.matched_interference_mm))
        fwd, summary = traverse(robot, lumen, seat, +1)
        bwd, _ = traverse(robot, lumen, seat, -1)
        print(f"{diameter:4d}   {seat:8.2f}   {fwd:12.4f}   {bwd:13.4f}"
              f"   {summary['elapsed_s']:10.1f}")

    print()
    p = cal.max_pressure_kPa
    tilt = tilt_angle((p, 0.0), 47.0, robot.geometry, robot.chamber)
    print(f"differential inflation ({p:g}, 0) kPa in the 94 mm pipe "
          f"tilts the chassis {tilt.tilt_deg:+.2f} deg")


if __name__ == "__main__":
    main()
