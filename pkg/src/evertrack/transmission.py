"""Worm-gear drivetrain model.

Closed-form relations mapping motor commands to track speed and to the
force budget available at the tracks.  A single worm engages the toothed
inner face of every track, so one shaft revolution advances each track by
one thread pitch; the thread geometry splits the gearhead torque into
tangential, axial and radial components on the track teeth.

All angles are radians internally; degrees are accepted only at the
configuration boundary.  Forces in N, torques in N*mm, lengths in mm.
"""

from dataclasses import dataclass
from math import isfinite, pi, tan


@dataclass(frozen=True)
class WormGearParams:
    """Geometry of the worm thread.

    Attributes:
        pitch_mm: Axial distance between adjacent threads.
        pitch_diameter_mm: Diameter of the worm pitch cylinder.
        lead_angle_rad: Helix angle of the thread; small values trade
            tangential force for axial force on the tracks.
        pressure_angle_rad: Flank angle of the thread; zero (squared
            thread) suppresses the radial separating force.
    """

    pitch_mm: float
    pitch_diameter_mm: float
    lead_angle_rad: float
    pressure_angle_rad: float

    def __post_init__(self):
        if not (isfinite(self.pitch_mm) and self.pitch_mm > 0):
            raise ValueError(f"pitch_mm must be positive, got {self.pitch_mm}")
        if not (isfinite(self.pitch_diameter_mm) and self.pitch_diameter_mm > 0):
            raise ValueError(
                f"pitch_diameter_mm must be positive, got {self.pitch_diameter_mm}"
            )
        if not 0 < self.lead_angle_rad < pi / 2:
            raise ValueError(
                f"lead_angle_rad must lie in (0, pi/2), got {self.lead_angle_rad}"
            )
        if not 0 <= self.pressure_angle_rad < pi / 2:
            raise ValueError(
                f"pressure_angle_rad must lie in [0, pi/2), got {self.pressure_angle_rad}"
            )


@dataclass(frozen=True)
class GearheadParams:
    """Motor plus reduction gearbox feeding the worm shaft.

    The motor torque default in the shipped calibration is a placeholder:
    no measured value exists for the prototype's motor, so it is a
    calibration input.  The same goes for the gearbox efficiency, which
    defaults to 0.5 as typical for a high-ratio multi-stage gearhead.
    """

    motor_torque_Nmm: float
    gear_ratio: float
    efficiency: float
    max_motor_speed_radps: float

    def __post_init__(self):
        if not (isfinite(self.motor_torque_Nmm) and self.motor_torque_Nmm >= 0):
            raise ValueError(
                f"motor_torque_Nmm must be >= 0, got {self.motor_torque_Nmm}"
            )
        if not (isfinite(self.gear_ratio) and self.gear_ratio >= 1):
            raise ValueError(f"gear_ratio must be >= 1, got {self.gear_ratio}")
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        if not (isfinite(self.max_motor_speed_radps) and self.max_motor_speed_radps > 0):
            raise ValueError(
                f"max_motor_speed_radps must be positive, got {self.max_motor_speed_radps}"
            )

    @property
    def max_shaft_speed_radps(self) -> float:
        """Worm shaft speed at full motor speed."""
        return self.max_motor_speed_radps / self.gear_ratio


@dataclass(frozen=True)
class TransmissionForces:
    """Force components the worm applies to the track teeth.

    Attributes:
        tangential_N: Force along the worm's direction of tooth sliding.
        axial_N: Force along the track travel direction; this is the
            propulsion budget.
        radial_N: Separating force pushing worm and track apart; zero for
            a squared (zero pressure angle) thread.
        gearhead_torque_Nmm: Torque at the worm shaft after the gearbox.
    """

    tangential_N: float
    axial_N: float
    radial_N: float
    gearhead_torque_Nmm: float


def robot_speed(shaft_speed_radps: float, pitch_mm: float) -> float:
    """Linear track (and ideal robot) speed for a given worm shaft speed.

    One shaft revolution advances the track by one pitch, so
    speed = shaft_speed * pitch / (2*pi).  The sign of the result follows
    the sign of the shaft speed (forward positive).

    Args:
        shaft_speed_radps: Worm shaft angular speed in rad/s (signed).
        pitch_mm: Worm thread pitch in mm.

    Returns:
        Robot speed in mm/s under the no-slip assumption.
    """
    if not isfinite(shaft_speed_radps):
        raise ValueError(f"shaft_speed_radps must be finite, got {shaft_speed_radps}")
    if not (isfinite(pitch_mm) and pitch_mm > 0):
        raise ValueError(f"pitch_mm must be positive, got {pitch_mm}")
    return shaft_speed_radps * pitch_mm / (2.0 * pi)


def drivetrain_forces(gear: GearheadParams, worm: WormGearParams) -> TransmissionForces:
    """Force budget the drivetrain can put on the tracks.

    Gearhead torque is motor torque times ratio times efficiency.  The
    tangential force follows from the torque over the pitch radius, the
    axial force from the lead angle, and the radial force from the
    pressure angle:

        T_G = T_M * i * eta
        F_T = 2 * T_G / D_W
        F_A = F_T / tan(lead angle)
        F_R = F_A * tan(pressure angle)

    Args:
        gear: Motor and gearbox parameters.
        worm: Worm thread geometry.

    Returns:
        TransmissionForces with all components (non-negative for
        non-negative inputs).
    """
    torque_Nmm = gear.motor_torque_Nmm * gear.gear_ratio * gear.efficiency
    tangential = 2.0 * torque_Nmm / worm.pitch_diameter_mm
    axial = tangential / tan(worm.lead_angle_rad)
    radial = axial * tan(worm.pressure_angle_rad)
    return TransmissionForces(
        tangential_N=tangential,
        axial_N=axial,
        radial_N=radial,
        gearhead_torque_Nmm=torque_Nmm,
    )
