"""Drive through the deformable phantom, then find the limits.

The phantom is a soft silicone tube with a 90 degree bend, tested in two
states: supported by rigid rings, and fully collapsed onto the robot.
The script traverses both at increasing inflation (speed climbs as the
tracks bite harder), sweeps anchored traction against pressure, and then
keeps inflating until the drivetrain can no longer turn the tracks.

Expect roughly 3.3-3.4 mm/s supported, 2.2-2.4 mm/s collapsed, a factor
of two of traction between 0 and 16 kPa, and a stall pressure a little
above 18 kPa, well before the membrane itself runs out of stretch.

Run:  python3 demos/phantom_traverse.py        (about 15 s)
"""
from __future__ import annotations

from evertrack import (
    Command,
    SimConfig,
    TimedCommand,
    load_calibration,
    paper_fixtures,
    run,
    stall_pressure_kPa,
    traction_sweep,
)


def traverse(robot, lumen, p_kPa):
    schedule = [TimedCommand(0.0, Command(
        robot.max_motor_speed_radps, p_kPa, p_kPa))]
    return run(lumen, robot, schedule, SimConfig(), s0_mm=0.0,
               exit_end="far").summary


def main():
    cal = load_calibration()
    robot = cal.build_robot()
    fixtures = paper_fixtures()

    print("phantom traverse, forward at full motor speed:")
    print("state       kPa   mean mm/s   sim time s")
    for name, label in (("phantom_supported", "supported"),
                        ("phantom_collapsed", "collapsed")):
        for p in cal.phantom_inflations_kPa:
            s = traverse(robot, fixtures[name], p)
            print(f"{label:9s}   {p:3g}   {s['mean_speed_mmps']:9.3f}"
                  f"   {s['elapsed_s']:10.1f}")

    print()
    print("anchored traction in the collapsed phantom:")
    print("kPa   pull N   total normal N   tracks")
    sweep = traction_sweep(robot, fixtures["phantom_collapsed"],
                           cal.traction_pressures_kPa)
    for row in sweep:
        print(f"{row['pressure_kPa']:3g}   {row['traction_N']:6.3f}   "
              f"{row['total_normal_N']:14.2f}   {row['tracks_in_contact']:6d}")

    print()
    stall = stall_pressure_kPa(robot, fixtures["phantom_collapsed"])
    if stall is None:
        print("no stall below the scan limit")
    else:
        shape = robot.chamber.shape(stall)
        print(f"over-inflation stall at {stall:g} kPa "
              f"(membrane stretch {shape.max_principal_stretch:.2f}, "
              f"cap {robot.chamber.options.stretch_cap:g}): past this "
              f"point the squeeze costs more than the tracks can pull")


if __name__ == "__main__":
    main()
