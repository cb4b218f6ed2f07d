"""Robot-lumen contact, traction budget, and differential-inflation tilt.

Quasi-static force balances in one cross-section of the robot.  Radially,
each track sits on a chain of springs: the chamber crown (secant
stiffness from the membrane model, bottoming out on the chassis guides
after a short travel), the track band, and the wall.  Rigid pipe walls
are infinitely stiff; phantom walls answer with their hoop stiffness; a
collapsed lumen is a drape that hugs the robot with a preload and
stretches as the chambers inflate.  Gravity drops the robot center
inside the lumen until the vertical components of the track normals
carry its weight, which is what unloads the upper tracks at low
inflation.

Axially, the drivetrain budget is spent first on track-chamber rubbing,
which grows with pressure; whatever remains caps the Coulomb traction
mu_t * sum(N).  Over-inflating therefore stalls the robot even though it
also grips harder.

Units: mm, N, kPa, degrees.  Track positions are angles from the
downward vertical with one track at the bottom; the gravity offset is
positive downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .membrane import ChamberModel

_G_MPS2 = 9.80665
CONTACT_FORCE_FLOOR_N = 1e-6


@dataclass(frozen=True)
class TrackSet:
    """The six (by default) worm-driven tracks and their friction pairs.

    guide_compliance interpolates between rigid track guides (0) and
    fully deployable ones (1); compliant guides relieve the squeeze
    between chamber and track, cutting the internal rub.  The relief
    scales with how far the guides are allowed to swing open.
    """

    n_tracks: int = 6
    mu_track_lumen: float = 0.3
    mu_track_chamber: float = 0.3
    track_band_stiffness_N_per_mm: float = 2.0
    guide_compliance: float = 1.0
    max_guide_opening_deg: float = 60.0

    def __post_init__(self):
        if not (isinstance(self.n_tracks, int) and self.n_tracks >= 3):
            raise ValueError(f"n_tracks must be an int >= 3, got {self.n_tracks}")
        for name in ("mu_track_lumen", "mu_track_chamber"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 2.0):
                raise ValueError(f"{name} must lie in [0, 2], got {v}")
        if self.track_band_stiffness_N_per_mm <= 0:
            raise ValueError("track_band_stiffness_N_per_mm must be positive")
        if not 0.0 <= self.guide_compliance <= 1.0:
            raise ValueError(
                f"guide_compliance must lie in [0, 1], got {self.guide_compliance}"
            )
        if not 0.0 < self.max_guide_opening_deg <= 90.0:
            raise ValueError(
                "max_guide_opening_deg must lie in (0, 90], "
                f"got {self.max_guide_opening_deg}"
            )

    @property
    def angles_rad(self) -> tuple[float, ...]:
        step = 2.0 * math.pi / self.n_tracks
        return tuple(k * step for k in range(self.n_tracks))

    @property
    def guide_relief(self) -> float:
        """Fraction of the chamber-track squeeze surviving the guides.

        1 for rigid guides; deployable guides opening to 60 deg halve the
        rub contact pressure, wider openings relieve proportionally more.
        Never reaches zero: some squeeze always remains to seat the
        tracks.
        """
        return 1.0 - self.guide_compliance * self.max_guide_opening_deg / 120.0


@dataclass(frozen=True)
class RobotGeometry:
    """Cross-section and mass constants of the assembled robot.

    The uninflated outer radius is the chamber rest crown plus the track
    band; the guides let a track seat sink only crown_stop_clearance_mm
    below the rest crown before it lands on the chassis, after which the
    radial stack continues at backstop stiffness.
    """

    track_thickness_mm: float = 2.5
    chamber_spacing_mm: float = 80.0
    mass_kg: float = 0.30
    nose_overhang_mm: float = 40.0
    chamber_seat_area_mm2: float = 4400.0
    crown_stop_clearance_mm: float = 2.5
    backstop_stiffness_N_per_mm: float = 50.0

    def __post_init__(self):
        for name in (
            "track_thickness_mm",
            "chamber_spacing_mm",
            "nose_overhang_mm",
            "chamber_seat_area_mm2",
            "crown_stop_clearance_mm",
            "backstop_stiffness_N_per_mm",
        ):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.mass_kg) and self.mass_kg >= 0):
            raise ValueError(f"mass_kg must be >= 0, got {self.mass_kg}")

    @property
    def weight_N(self) -> float:
        return self.mass_kg * _G_MPS2


@dataclass(frozen=True)
class ContactState:
    """Resolved cross-section contact at one pair of chamber pressures."""

    effective_radius_mm: float
    per_track_normal_N: tuple[float, ...]
    tracks_in_contact: int
    internal_drag_N: float
    tilt_deg: float
    gravity_offset_mm: float
    free_radius_mm: float

    @property
    def total_normal_N(self) -> float:
        return sum(self.per_track_normal_N)


@dataclass(frozen=True)
class TractionResult:
    """Propulsive budget left after friction limits are applied."""

    available_traction_N: float
    required_force_N: float
    margin_N: float
    stalled: bool


@dataclass(frozen=True)
class TiltResult:
    """Chassis axis tilt from differential inflation, resting under gravity.

    Drops are vertical offsets of the chamber planes' axis points from
    the lumen axis (non-positive; 0 means that end is wedged and
    self-centered).  nose_offset_mm extrapolates the axis to the camera
    nose.  jammed flags a robot wider than the lumen at both ends, which
    pins the axis straight.
    """

    tilt_deg: float
    front_drop_mm: float
    rear_drop_mm: float
    nose_offset_mm: float
    jammed: bool


def series_contact_force(
    interference_mm: float,
    chamber_stiffness_N_per_mm: float,
    band_stiffness_N_per_mm: float,
    wall_stiffness_N_per_mm: float,
    chamber_travel_mm: float,
    backstop_stiffness_N_per_mm: float,
) -> tuple[float, tuple[float, float, float]]:
    """Force in the chamber-band-wall spring chain at a given interference.

    The chamber spring is piecewise linear: after chamber_travel_mm of
    compression the track seat lands on the chassis guides and further
    travel costs backstop stiffness.  Wall stiffness may be math.inf
    (rigid pipe).  Returns the transmitted normal force and the
    (chamber, band, wall) compressions; all zero when the interference
    is not positive.
    """
    if interference_mm <= 0.0:
        return 0.0, (0.0, 0.0, 0.0)
    if chamber_stiffness_N_per_mm <= 0 or band_stiffness_N_per_mm <= 0:
        raise ValueError("spring stiffnesses must be positive")
    if wall_stiffness_N_per_mm <= 0:
        raise ValueError("wall stiffness must be positive (math.inf for rigid)")
    c_wall = 1.0 / wall_stiffness_N_per_mm  # 0.0 for a rigid wall
    c_band = 1.0 / band_stiffness_N_per_mm
    force = interference_mm / (1.0 / chamber_stiffness_N_per_mm + c_band + c_wall)
    d_ch = force / chamber_stiffness_N_per_mm
    if d_ch > chamber_travel_mm:
        # seat on the backstop: chamber leg is travel + overrun at backstop rate
        k_b = backstop_stiffness_N_per_mm
        num = interference_mm - chamber_travel_mm * (
            1.0 - chamber_stiffness_N_per_mm / k_b
        )
        force = num / (1.0 / k_b + c_band + c_wall)
        d_ch = chamber_travel_mm + (
            force - chamber_stiffness_N_per_mm * chamber_travel_mm
        ) / k_b
    return force, (d_ch, force * c_band, force * c_wall)


def internal_drag_N(
    pressures_kPa: tuple[float, float],
    tracks: TrackSet,
    geometry: RobotGeometry,
) -> float:
    """Axial friction between sliding tracks and the chamber crowns.

    The chambers press the track seats with roughly their internal
    pressure over the seat area, so the rub force scales with pressure;
    compliant guides relieve part of the squeeze.  Linear in pressure by
    construction: the seat area is an effective constant folded into the
    calibration.
    """
    p1, p2 = pressures_kPa
    if p1 < 0 or p2 < 0:
        raise ValueError(f"pressures must be >= 0, got {pressures_kPa}")
    seat_force = geometry.chamber_seat_area_mm2 * 1e-3 * (p1 + p2)  # kPa -> MPa
    return tracks.mu_track_chamber * tracks.guide_relief * seat_force


def _wall_distance_mm(lumen_radius_mm: float, offset_mm: float, angle_rad: float) -> float:
    """Distance from the dropped robot center to the wall along a track ray."""
    s = math.sin(angle_rad)
    c = math.cos(angle_rad)
    under = lumen_radius_mm * lumen_radius_mm - (offset_mm * s) ** 2
    return -offset_mm * c + math.sqrt(max(under, 0.0))


@dataclass(frozen=True)
class _Ring:
    """Per-chamber quantities the radial stack needs, at one pressure."""

    free_radius_mm: float  # crown plus track band
    chamber_stiffness_N_per_mm: float  # per track: ring secant / n_tracks
    chamber_travel_mm: float  # crown compression until the guide backstop


def equilibrium_contact(
    pressures_kPa: tuple[float, float],
    lumen_radius_mm: float,
    wall_stiffness_N_per_mm: float,
    tracks: TrackSet,
    chamber: ChamberModel,
    *,
    geometry: RobotGeometry | None = None,
    gravity: bool = True,
    collapsed: bool = False,
    collapse_preload_N: float = 0.0,
    bench_stiffness_N_per_mm: float = 2.0,
) -> ContactState:
    """Per-track normals and effective radius at a pair of chamber pressures.

    Both chambers press the same track set; their rings are resolved in a
    common cross-section (tilt is reported but does not redistribute the
    ring loads).  For ordinary walls the interference is measured against
    the local lumen radius, with wall_stiffness_N_per_mm per track
    (math.inf for a rigid pipe) and, under gravity, a bench-backed bottom:
    the phantom lies on a table, so the wall under the robot works in
    compression at bench_stiffness_N_per_mm rather than in hoop mode.

    A collapsed lumen instead hugs the robot everywhere: each track sees
    a drape preload plus wall_stiffness_N_per_mm (now the drape stretch
    rate) times the crown displacement, independent of where the wall
    rest radius is, and the robot's weight passes through the bottom
    track into the bench.

    Gravity is solved as a vertical offset of the robot center such that
    the normals' vertical components carry the weight; tracks with local
    clearance carry nothing, which is how partial-contact states arise.
    """
    geo = geometry or RobotGeometry()
    p1, p2 = pressures_kPa
    if p1 < 0 or p2 < 0:
        raise ValueError(f"pressures must be >= 0, got {pressures_kPa}")
    if lumen_radius_mm <= 0:
        raise ValueError(f"lumen_radius_mm must be positive, got {lumen_radius_mm}")
    if wall_stiffness_N_per_mm <= 0:
        raise ValueError("wall_stiffness_N_per_mm must be positive (math.inf rigid)")
    if collapsed and not math.isfinite(wall_stiffness_N_per_mm):
        raise ValueError("a collapsed lumen needs a finite drape stiffness")
    if collapse_preload_N < 0:
        raise ValueError(f"collapse_preload_N must be >= 0, got {collapse_preload_N}")

    rest_crown = chamber.rest_crown_radius_mm
    rest_radius = rest_crown + geo.track_thickness_mm
    rings = []
    for p in (p1, p2):
        crown = chamber.free_radius_mm(p)
        rings.append(
            _Ring(
                free_radius_mm=crown + geo.track_thickness_mm,
                chamber_stiffness_N_per_mm=chamber.radial_stiffness_N_per_mm(p)
                / tracks.n_tracks,
                chamber_travel_mm=crown - (rest_crown - geo.crown_stop_clearance_mm),
            )
        )

    angles = tracks.angles_rad
    cosines = [math.cos(a) for a in angles]
    k_band = tracks.track_band_stiffness_N_per_mm
    hug_share = collapse_preload_N / (2.0 * tracks.n_tracks)

    def per_track_normals(offset_mm: float) -> list[float]:
        normals = [0.0] * tracks.n_tracks
        for ring in rings:
            if collapsed:
                hug = hug_share + wall_stiffness_N_per_mm * (
                    ring.free_radius_mm - rest_radius
                )
                for k in range(tracks.n_tracks):
                    normals[k] += max(hug, 0.0)
                if gravity and offset_mm > 0.0:
                    # weight path: bottom track seat pressed into the bench
                    force, _ = series_contact_force(
                        offset_mm,
                        ring.chamber_stiffness_N_per_mm,
                        k_band,
                        bench_stiffness_N_per_mm,
                        ring.chamber_travel_mm,
                        geo.backstop_stiffness_N_per_mm,
                    )
                    normals[0] += force
            else:
                for k in range(tracks.n_tracks):
                    gap = _wall_distance_mm(lumen_radius_mm, offset_mm, angles[k])
                    delta = ring.free_radius_mm - gap
                    k_wall = wall_stiffness_N_per_mm
                    if k == 0 and gravity and math.isfinite(k_wall):
                        k_wall = max(k_wall, bench_stiffness_N_per_mm)
                    force, _ = series_contact_force(
                        delta,
                        ring.chamber_stiffness_N_per_mm,
                        k_band,
                        k_wall,
                        ring.chamber_travel_mm,
                        geo.backstop_stiffness_N_per_mm,
                    )
                    normals[k] += force
        return normals

    offset = 0.0
    weight = geo.weight_N
    if gravity and weight > 0.0:

        def imbalance(e: float) -> float:
            return (
                sum(n * c for n, c in zip(per_track_normals(e), cosines)) - weight
            )

        cap = 0.98 * lumen_radius_mm
        if imbalance(0.0) > 0.0:
            # bench-backed bottom overcarries the weight before any drop
            # (soft hoop wall, stiff table): the center rides above the axis
            lo = -1.0
            while imbalance(lo) > 0.0 and lo > -cap:
                lo = max(2.0 * lo, -cap)
            if imbalance(lo) > 0.0:
                offset = lo
            else:
                offset = brentq(imbalance, lo, 0.0, xtol=1e-10)
        else:
            hi = 1.0
            while imbalance(hi) < 0.0 and hi < cap:
                hi = min(2.0 * hi, cap)
            if imbalance(hi) < 0.0:
                offset = hi  # springs cannot carry the weight inside the lumen
            else:
                offset = brentq(imbalance, 0.0, hi, xtol=1e-10)

    normals = per_track_normals(offset)
    in_contact = sum(1 for n in normals if n > CONTACT_FORCE_FLOOR_N)

    # effective radius from the centered balance: the gravity offset moves
    # the robot, not the radius the dominant chamber rides at
    effectives = []
    for ring in rings:
        if collapsed:
            delta = ring.free_radius_mm - rest_radius
            _, (_, _, d_wall) = series_contact_force(
                delta,
                ring.chamber_stiffness_N_per_mm,
                k_band,
                wall_stiffness_N_per_mm,
                ring.chamber_travel_mm,
                geo.backstop_stiffness_N_per_mm,
            )
            effectives.append(rest_radius + d_wall)
        else:
            delta = ring.free_radius_mm - lumen_radius_mm
            if delta <= 0.0:
                effectives.append(ring.free_radius_mm)
            else:
                _, (_, _, d_wall) = series_contact_force(
                    delta,
                    ring.chamber_stiffness_N_per_mm,
                    k_band,
                    wall_stiffness_N_per_mm,
                    ring.chamber_travel_mm,
                    geo.backstop_stiffness_N_per_mm,
                )
                effectives.append(lumen_radius_mm + d_wall)

    tilt = tilt_angle((p1, p2), lumen_radius_mm, geo, chamber, gravity=gravity)

    return ContactState(
        effective_radius_mm=max(effectives),
        per_track_normal_N=tuple(normals),
        tracks_in_contact=in_contact,
        internal_drag_N=internal_drag_N((p1, p2), tracks, geo),
        tilt_deg=tilt.tilt_deg,
        gravity_offset_mm=offset,
        free_radius_mm=max(r.free_radius_mm for r in rings),
    )


def traction(
    state: ContactState,
    tracks: TrackSet,
    forces,
    required_force_N: float = 0.0,
) -> TractionResult:
    """Propulsive force the tracks can transmit in this contact state.

    Coulomb grip mu_t * sum(N) is capped by the axial budget left after
    the internal track-chamber rub.  Stalled means the budget is gone or
    the grip cannot hold the required force with the robot at rest.
    `forces` is the drivetrain force bundle; only its axial component is
    consumed here.
    """
    if required_force_N < 0:
        raise ValueError(f"required_force_N must be >= 0, got {required_force_N}")
    usable = forces.axial_N - state.internal_drag_N
    grip = tracks.mu_track_lumen * state.total_normal_N
    available = max(0.0, min(grip, usable))
    stalled = usable <= 0.0 or available < required_force_N
    return TractionResult(
        available_traction_N=available,
        required_force_N=required_force_N,
        margin_N=available - required_force_N,
        stalled=stalled,
    )


def tilt_angle(
    pressures_kPa: tuple[float, float],
    lumen_radius_mm: float,
    geometry: RobotGeometry,
    chamber: ChamberModel,
    gravity: bool = True,
) -> TiltResult:
    """Geometric chassis tilt from independently inflated chamber ends.

    Each end rests at the bottom of the lumen with whatever clearance its
    inflated radius leaves; an end that fills the lumen self-centers.
    Front is chamber 1: inflating it more than the rear lifts the nose,
    so tilt is positive front-up, and swapping the pressures negates the
    angle exactly.  Without gravity the robot floats centered and the
    tilt is zero by symmetry.  The elastic sag of a wedged end under the
    robot's weight is ignored (well under a millimetre at contact
    stiffness).
    """
    p1, p2 = pressures_kPa
    if p1 < 0 or p2 < 0:
        raise ValueError(f"pressures must be >= 0, got {pressures_kPa}")
    if lumen_radius_mm <= 0:
        raise ValueError(f"lumen_radius_mm must be positive, got {lumen_radius_mm}")
    r_front = chamber.free_radius_mm(p1) + geometry.track_thickness_mm
    r_rear = chamber.free_radius_mm(p2) + geometry.track_thickness_mm
    jammed = r_front > lumen_radius_mm and r_rear > lumen_radius_mm
    if not gravity:
        return TiltResult(0.0, 0.0, 0.0, 0.0, jammed)
    drop_front = -max(lumen_radius_mm - min(r_front, lumen_radius_mm), 0.0)
    drop_rear = -max(lumen_radius_mm - min(r_rear, lumen_radius_mm), 0.0)
    rise = drop_front - drop_rear
    tilt = math.degrees(math.atan2(rise, geometry.chamber_spacing_mm))
    nose = drop_front + rise / geometry.chamber_spacing_mm * geometry.nose_overhang_mm
    # the nose cannot leave the lumen: clamp the extrapolated axis offset
    nose_limit = lumen_radius_mm - chamber.profile.chassis_radius_mm
    nose = max(-nose_limit, min(nose, nose_limit))
    return TiltResult(
        tilt_deg=tilt,
        front_drop_mm=drop_front,
        rear_drop_mm=drop_rear,
        nose_offset_mm=nose,
        jammed=jammed,
    )
