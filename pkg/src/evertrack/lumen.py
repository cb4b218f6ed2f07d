"""Parameterized lumen environments.

A lumen is an ordered chain of straight and elbow segments, each with a
local diameter and an optional wavy radius profile, wrapped in a wall
model (rigid, elastic, or elastic-collapsed), friction, support rings and
a lubrication flag.  Includes constructors for the bench fixtures used in
the locomotion experiments: three rigid pipes and a soft two-straights-
plus-elbow phantom in supported and collapsed states.

Conventions: arclength s runs from 0 at the entrance; elbows bend in the
horizontal plane by default so a level bench setup has zero slope
everywhere.  A collapsed wall reports its rest radius here; the collapse
itself is handled as a wall preload by the contact model, not as
geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Waviness:
    """Sinusoidal modulation of the local radius along arclength."""

    amplitude_mm: float = 0.0
    period_mm: float = 50.0


@dataclass(frozen=True)
class Straight:
    length_mm: float


@dataclass(frozen=True)
class Elbow:
    bend_radius_mm: float
    sweep_deg: float

    @property
    def length_mm(self) -> float:
        return self.bend_radius_mm * math.radians(self.sweep_deg)


@dataclass(frozen=True)
class LumenSegment:
    kind: Straight | Elbow
    diameter_mm: float
    waviness: Waviness = field(default_factory=Waviness)

    def __post_init__(self):
        if self.diameter_mm <= 0:
            raise ValueError(f"diameter_mm must be positive, got {self.diameter_mm}")
        if isinstance(self.kind, Straight):
            if self.kind.length_mm <= 0:
                raise ValueError("straight segment length must be positive")
        elif isinstance(self.kind, Elbow):
            if self.kind.bend_radius_mm <= 0:
                raise ValueError("elbow bend radius must be positive")
            if not 0 < self.kind.sweep_deg <= 180:
                raise ValueError(
                    f"elbow sweep must lie in (0, 180] deg, got {self.kind.sweep_deg}"
                )
        else:
            raise TypeError(f"unknown segment kind {self.kind!r}")
        if self.waviness.amplitude_mm < 0:
            raise ValueError("waviness amplitude must be >= 0")
        if self.waviness.amplitude_mm >= self.diameter_mm / 4:
            raise ValueError("waviness amplitude must stay below diameter/4")
        if self.waviness.amplitude_mm > 0 and self.waviness.period_mm <= 0:
            raise ValueError("waviness period must be positive")

    @property
    def length_mm(self) -> float:
        return self.kind.length_mm


@dataclass(frozen=True)
class RigidWall:
    """Ideally stiff wall; interference is absorbed entirely by the robot."""


@dataclass(frozen=True)
class ElasticWall:
    """Compliant wall with a per-track radial hoop stiffness.

    `collapsed` marks a wall that has draped onto the robot: contact then
    carries a preload even at zero geometric interference.
    """

    hoop_stiffness_N_per_mm: float
    collapsed: bool = False

    def __post_init__(self):
        if self.hoop_stiffness_N_per_mm <= 0:
            raise ValueError("hoop_stiffness_N_per_mm must be positive")


@dataclass(frozen=True)
class LumenModel:
    segments: tuple[LumenSegment, ...]
    wall: RigidWall | ElasticWall
    mu_wall: float
    supports: tuple[float, ...] = ()
    lubricated: bool = False
    support_halfwidth_mm: float = 20.0
    elbow_plane: str = "horizontal"  # "horizontal" | "vertical"

    def __post_init__(self):
        if len(self.segments) < 1:
            raise ValueError("a lumen needs at least one segment")
        if self.mu_wall <= 0:
            raise ValueError(f"mu_wall must be positive, got {self.mu_wall}")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.diameter_mm - b.diameter_mm) > 1e-9:
                raise ValueError(
                    "segment diameters must match across joints "
                    f"({a.diameter_mm} vs {b.diameter_mm})"
                )
        if isinstance(self.wall, RigidWall):
            pass
        elif not isinstance(self.wall, ElasticWall):
            raise TypeError(f"unknown wall model {self.wall!r}")
        total = self.total_length_mm
        for s in self.supports:
            if not 0 <= s <= total:
                raise ValueError(f"support position {s} outside [0, {total}]")
        if self.elbow_plane not in ("horizontal", "vertical"):
            raise ValueError(f"elbow_plane must be horizontal|vertical, got {self.elbow_plane}")

    @property
    def total_length_mm(self) -> float:
        return sum(seg.length_mm for seg in self.segments)

    @property
    def collapsed(self) -> bool:
        return isinstance(self.wall, ElasticWall) and self.wall.collapsed

    def segment_at(self, s_mm: float) -> tuple[LumenSegment, float, int]:
        """Segment containing arclength s, its local offset, and its index."""
        if not 0 <= s_mm <= self.total_length_mm + 1e-9:
            raise ValueError(
                f"arclength {s_mm} outside [0, {self.total_length_mm}]"
            )
        acc = 0.0
        for i, seg in enumerate(self.segments):
            if s_mm <= acc + seg.length_mm or i == len(self.segments) - 1:
                return seg, min(s_mm - acc, seg.length_mm), i
            acc += seg.length_mm
        raise AssertionError("unreachable")

    def local_radius(self, s_mm: float) -> float:
        """Local wall radius at arclength s, including the wavy profile."""
        seg, local_s, idx = self.segment_at(s_mm)
        r = seg.diameter_mm / 2.0
        w = seg.waviness
        if w.amplitude_mm > 0:
            # phase measured in global arclength so waves run continuously
            r += w.amplitude_mm * math.sin(2.0 * math.pi * s_mm / w.period_mm)
        return r

    def centerline_pose(self, s_mm: float) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        """Position and unit tangent of the centerline at arclength s.

        The entry axis is +x; elbows bend in the configured plane
        (horizontal: xy, vertical: xz).  Piecewise-smooth by construction.
        """
        if not 0 <= s_mm <= self.total_length_mm + 1e-9:
            raise ValueError(
                f"arclength {s_mm} outside [0, {self.total_length_mm}]"
            )
        # walk segments in 2D (u, v), then embed v into y or z
        pos = [0.0, 0.0]
        heading = 0.0
        remaining = s_mm
        for seg in self.segments:
            take = min(remaining, seg.length_mm)
            if isinstance(seg.kind, Straight):
                pos[0] += take * math.cos(heading)
                pos[1] += take * math.sin(heading)
            else:
                rho = seg.kind.bend_radius_mm
                dpsi = take / rho
                # circular arc turning left in the (u, v) plane
                cx = pos[0] - rho * math.sin(heading)
                cy = pos[1] + rho * math.cos(heading)
                heading2 = heading + dpsi
                pos[0] = cx + rho * math.sin(heading2)
                pos[1] = cy - rho * math.cos(heading2)
                heading = heading2
            remaining -= take
            if remaining <= 1e-12:
                break
        tangent2d = (math.cos(heading), math.sin(heading))
        if self.elbow_plane == "horizontal":
            return (pos[0], pos[1], 0.0), (tangent2d[0], tangent2d[1], 0.0)
        return (pos[0], 0.0, pos[1]), (tangent2d[0], 0.0, tangent2d[1])

    def slope_sin(self, s_mm: float) -> float:
        """Sine of the centerline slope (z-component of the unit tangent)."""
        _, tangent = self.centerline_pose(s_mm)
        return tangent[2]

    def near_support(self, s_mm: float) -> bool:
        return any(abs(s_mm - p) <= self.support_halfwidth_mm for p in self.supports)

    def elbows_passed(self, s_from_mm: float, s_to_mm: float) -> int:
        """Count elbow segments entered while moving from s_from to s_to."""
        lo, hi = sorted((s_from_mm, s_to_mm))
        acc = 0.0
        n = 0
        for seg in self.segments:
            start, end = acc, acc + seg.length_mm
            if isinstance(seg.kind, Elbow) and start < hi and end > lo:
                # entered if the travel interval reaches into the elbow
                if hi > start and lo < end:
                    n += 1
            acc = end
        return n


def local_radius(lumen: LumenModel, s_mm: float) -> float:
    return lumen.local_radius(s_mm)


def centerline_pose(lumen: LumenModel, s_mm: float):
    return lumen.centerline_pose(s_mm)


def _rigid_pipe(diameter_mm: float, length_mm: float = 600.0) -> LumenModel:
    return LumenModel(
        segments=(LumenSegment(Straight(length_mm), diameter_mm),),
        wall=RigidWall(),
        mu_wall=0.35,
        lubricated=False,
    )


def _phantom(collapsed: bool) -> LumenModel:
    """Soft silicone phantom: straight, 90 deg elbow, straight; ~600 mm.

    The supported variant carries four rigid rings: entrance, exit, and
    both ends of the elbow.  Both variants are cast with a wavy inner
    profile and are lubricated before a run.
    """
    elbow = Elbow(bend_radius_mm=75.0, sweep_deg=90.0)
    elbow_len = elbow.length_mm  # ~117.81
    straight_len = (600.0 - elbow_len) / 2.0
    segments = (
        LumenSegment(Straight(straight_len), 85.0, Waviness(amplitude_mm=1.5, period_mm=40.0)),
        LumenSegment(elbow, 85.0, Waviness(amplitude_mm=1.5, period_mm=40.0)),
        LumenSegment(Straight(straight_len), 85.0, Waviness(amplitude_mm=1.5, period_mm=40.0)),
    )
    total = sum(s.length_mm for s in segments)
    supports = () if collapsed else (0.0, straight_len, straight_len + elbow_len, total)
    return LumenModel(
        segments=segments,
        wall=ElasticWall(hoop_stiffness_N_per_mm=0.35, collapsed=collapsed),
        mu_wall=0.55,
        supports=supports,
        lubricated=True,
    )


def paper_fixtures() -> dict[str, LumenModel]:
    """Named catalog of the bench-test lumens.

    Returns a fresh dict each call; the models themselves are immutable,
    so the catalog is reproducible bit-for-bit between runs.
    """
    return {
        "pipe74": _rigid_pipe(74.0),
        "pipe84": _rigid_pipe(84.0),
        "pipe94": _rigid_pipe(94.0),
        "phantom_supported": _phantom(collapsed=False),
        "phantom_collapsed": _phantom(collapsed=True),
    }
