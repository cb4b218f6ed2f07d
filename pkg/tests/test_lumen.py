"""Lumen geometry: centerlines, radii, walls, and the bench fixtures."""
from __future__ import annotations

import math

import numpy as np
import pytest

from evertrack import (
    Elbow,
    ElasticWall,
    LumenModel,
    LumenSegment,
    RigidWall,
    Straight,
    Waviness,
    paper_fixtures,
)


def _straight(diameter_mm=84.0, length_mm=300.0, waviness=None, **kwargs):
    if waviness is None:
        waviness = Waviness()
    seg = LumenSegment(Straight(length_mm), diameter_mm, waviness)
    kwargs.setdefault("mu_wall", 0.3)
    return LumenModel(segments=(seg,), wall=RigidWall(), **kwargs)


def test_straight_radius_everywhere():
    lumen = _straight(diameter_mm=84.0)
    for s in np.linspace(0.0, lumen.total_length_mm, 17):
        assert lumen.local_radius(float(s)) == pytest.approx(42.0, abs=1e-12)


def test_elbow_arclength():
    seg = LumenSegment(Elbow(bend_radius_mm=75.0, sweep_deg=90.0), 84.0)
    lumen = LumenModel(segments=(seg,), wall=RigidWall(), mu_wall=0.3)
    assert lumen.total_length_mm == pytest.approx(75.0 * math.pi / 2.0, abs=1e-9)
    assert lumen.total_length_mm == pytest.approx(117.81, abs=0.005)


def test_wavy_profile_peak_to_peak():
    wavy = _straight(diameter_mm=85.0, length_mm=120.0,
                     waviness=Waviness(amplitude_mm=3.0, period_mm=40.0))
    s = np.linspace(0.0, 40.0, 4001)
    radii = np.array([wavy.local_radius(float(x)) for x in s])
    assert radii.max() - radii.min() == pytest.approx(6.0, abs=1e-6)


def test_arclength_additivity():
    segs = (
        LumenSegment(Straight(180.0), 85.0),
        LumenSegment(Elbow(75.0, 90.0), 85.0),
        LumenSegment(Straight(302.19), 85.0),
    )
    lumen = LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3)
    expected = 180.0 + 75.0 * math.pi / 2.0 + 302.19
    assert abs(lumen.total_length_mm - expected) < 1e-9


def test_radius_continuity_at_joints():
    segs = (
        LumenSegment(Straight(100.0), 84.0),
        LumenSegment(Elbow(75.0, 90.0), 84.0),
    )
    lumen = LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3)
    eps = 1e-7
    assert lumen.local_radius(100.0 - eps) == pytest.approx(
        lumen.local_radius(100.0 + eps), abs=1e-6)


def test_mismatched_joint_diameters_rejected():
    segs = (
        LumenSegment(Straight(100.0), 84.0),
        LumenSegment(Straight(100.0), 74.0),
    )
    with pytest.raises(ValueError):
        LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3)


def test_segment_invariants_rejected():
    with pytest.raises(ValueError):
        LumenSegment(Straight(-5.0), 84.0)
    with pytest.raises(ValueError):
        LumenSegment(Elbow(75.0, 0.0), 84.0)
    with pytest.raises(ValueError):
        LumenSegment(Elbow(75.0, 190.0), 84.0)
    with pytest.raises(ValueError):
        LumenSegment(Straight(100.0), -84.0)
    with pytest.raises(ValueError):
        # Waviness deeper than a quarter of the bore.
        LumenSegment(Straight(100.0), 84.0, Waviness(25.0, 40.0))


def test_model_invariants_rejected():
    seg = LumenSegment(Straight(100.0), 84.0)
    with pytest.raises(ValueError):
        LumenModel(segments=(), wall=RigidWall(), mu_wall=0.3)
    with pytest.raises(ValueError):
        LumenModel(segments=(seg,), wall=RigidWall(), mu_wall=0.0)
    with pytest.raises(ValueError):
        LumenModel(segments=(seg,), wall=RigidWall(), mu_wall=0.3,
                   supports=(150.0,))
    with pytest.raises(ValueError):
        ElasticWall(hoop_stiffness_N_per_mm=0.0)


def test_collapse_lives_on_the_elastic_wall():
    seg = LumenSegment(Straight(100.0), 84.0)
    rigid = LumenModel(segments=(seg,), wall=RigidWall(), mu_wall=0.3)
    assert not rigid.collapsed
    soft = LumenModel(segments=(seg,), wall=ElasticWall(0.1, collapsed=True),
                      mu_wall=0.3)
    assert soft.collapsed


def test_radius_out_of_range_rejected():
    lumen = _straight(length_mm=100.0)
    with pytest.raises(ValueError):
        lumen.local_radius(-1.0)
    with pytest.raises(ValueError):
        lumen.local_radius(101.0)


def test_pose_entry_is_origin_with_entry_tangent():
    lumen = _straight()
    position, tangent = lumen.centerline_pose(0.0)
    assert position == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
    assert tangent == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)


def test_pose_linear_on_straight():
    lumen = _straight(length_mm=300.0)
    p1, t1 = lumen.centerline_pose(60.0)
    p2, t2 = lumen.centerline_pose(180.0)
    assert np.allclose(np.subtract(p2, p1), np.multiply(t1, 120.0), atol=1e-9)
    assert t1 == pytest.approx(t2, abs=1e-12)


def test_pose_tangent_unit_norm_everywhere():
    segs = (
        LumenSegment(Straight(180.0), 85.0),
        LumenSegment(Elbow(75.0, 90.0), 85.0),
        LumenSegment(Straight(300.0), 85.0),
    )
    lumen = LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3)
    for s in np.linspace(0.0, lumen.total_length_mm, 41):
        _, tangent = lumen.centerline_pose(float(s))
        assert np.linalg.norm(tangent) == pytest.approx(1.0, abs=1e-12)


def test_elbow_rotates_tangent_ninety_degrees():
    segs = (
        LumenSegment(Straight(100.0), 85.0),
        LumenSegment(Elbow(75.0, 90.0), 85.0),
        LumenSegment(Straight(100.0), 85.0),
    )
    lumen = LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3)
    _, entry = lumen.centerline_pose(0.0)
    _, exit_tangent = lumen.centerline_pose(lumen.total_length_mm)
    dot = sum(a * b for a, b in zip(entry, exit_tangent))
    assert abs(dot) < 1e-9


def test_pose_continuous_across_elbow_joint():
    segs = (
        LumenSegment(Straight(100.0), 85.0),
        LumenSegment(Elbow(75.0, 90.0), 85.0),
    )
    lumen = LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3)
    eps = 1e-6
    p_before, _ = lumen.centerline_pose(100.0 - eps)
    p_after, _ = lumen.centerline_pose(100.0 + eps)
    assert np.allclose(p_before, p_after, atol=1e-4)


def test_vertical_elbow_plane_bends_into_z():
    segs = (
        LumenSegment(Straight(100.0), 85.0),
        LumenSegment(Elbow(75.0, 90.0), 85.0),
    )
    lumen = LumenModel(segments=segs, wall=RigidWall(), mu_wall=0.3,
                       elbow_plane="vertical")
    _, tangent = lumen.centerline_pose(lumen.total_length_mm)
    assert abs(tangent[1]) < 1e-12
    assert tangent[2] == pytest.approx(1.0, abs=1e-9)
    # A climbing tangent means gravity pulls backward along the path.
    assert lumen.slope_sin(lumen.total_length_mm) == pytest.approx(1.0, abs=1e-9)


def test_fixture_catalog_names():
    catalog = paper_fixtures()
    assert set(catalog) == {
        "pipe74", "pipe84", "pipe94", "phantom_supported", "phantom_collapsed",
    }


def test_pipe_fixture_radii():
    catalog = paper_fixtures()
    assert catalog["pipe94"].local_radius(10.0) == pytest.approx(47.0, abs=1e-12)
    assert catalog["pipe84"].local_radius(10.0) == pytest.approx(42.0, abs=1e-12)
    assert catalog["pipe74"].local_radius(10.0) == pytest.approx(37.0, abs=1e-12)
    for name in ("pipe74", "pipe84", "pipe94"):
        assert isinstance(catalog[name].wall, RigidWall)


def test_phantom_fixture_shape():
    catalog = paper_fixtures()
    for name in ("phantom_supported", "phantom_collapsed"):
        phantom = catalog[name]
        assert phantom.total_length_mm == pytest.approx(600.0, rel=0.02)
        assert phantom.lubricated
        assert isinstance(phantom.wall, ElasticWall)
        kinds = [type(seg.kind) for seg in phantom.segments]
        assert kinds == [Straight, Elbow, Straight]
        assert phantom.segments[1].kind.sweep_deg == pytest.approx(90.0)
        # Nominal 85 mm wavy bore.
        mid = phantom.total_length_mm / 2.0
        assert phantom.local_radius(mid) == pytest.approx(42.5, abs=4.0)


def test_phantom_variants_differ_only_in_support_and_collapse():
    catalog = paper_fixtures()
    supported = catalog["phantom_supported"]
    collapsed = catalog["phantom_collapsed"]
    assert len(supported.supports) == 4
    assert collapsed.wall.collapsed
    assert not supported.wall.collapsed
    assert supported.segments == collapsed.segments


def test_supports_mark_entrance_exit_and_elbow_ends():
    supported = paper_fixtures()["phantom_supported"]
    total = supported.total_length_mm
    positions = sorted(supported.supports)
    straight1 = supported.segments[0].kind.length_mm
    elbow_len = 75.0 * math.pi / 2.0
    assert positions[0] == pytest.approx(0.0, abs=25.0)
    assert positions[1] == pytest.approx(straight1, abs=25.0)
    assert positions[2] == pytest.approx(straight1 + elbow_len, abs=25.0)
    assert positions[3] == pytest.approx(total, abs=25.0)


def test_near_support_window(fixtures):
    supported = fixtures["phantom_supported"]
    for s_support in supported.supports:
        probe = min(max(s_support, 0.0), supported.total_length_mm)
        assert supported.near_support(probe)
    # Mid-segment far from any support ring.
    mid = supported.segments[0].kind.length_mm / 2.0
    assert not supported.near_support(mid)


def test_elbows_passed_counts():
    catalog = paper_fixtures()
    phantom = catalog["phantom_supported"]
    straight1 = phantom.segments[0].kind.length_mm
    assert phantom.elbows_passed(0.0, straight1 * 0.5) == 0
    assert phantom.elbows_passed(0.0, phantom.total_length_mm) == 1
    # Symmetric in direction of travel.
    assert phantom.elbows_passed(phantom.total_length_mm, 0.0) == 1
    pipe = catalog["pipe84"]
    assert pipe.elbows_passed(0.0, pipe.total_length_mm) == 0


def test_fixture_catalog_reproducible():
    assert paper_fixtures() == paper_fixtures()


def test_slope_sin_level_pipe():
    lumen = _straight()
    assert lumen.slope_sin(50.0) == pytest.approx(0.0, abs=1e-12)
