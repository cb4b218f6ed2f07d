"""Inflatable chamber cross-section: equilibrium solves and stiffness probes.

The heavier n=192 checks (full inflation map, mesh refinement, the
bench-number comparisons) live in test_acceptance; here the structural
oracles run on small meshes.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from evertrack import ChamberModel, ChamberProfile, OgdenMaterial
from evertrack.errors import ConvergenceError, OverInflationError, StiffnessError
from evertrack.membrane import (
    SolverOptions,
    _EnergyModel,
    _polyline_volume,
    axial_stiffness,
    inflate,
    pressure_curve,
    radial_secant_stiffness,
    write_pressure_curve_csv,
)


@pytest.fixture(scope="module")
def lf96(calibration):
    return replace(calibration.profile, n_nodes=96)


@pytest.fixture(scope="module")
def cf96(lf96):
    return replace(lf96, flange_style="CF")


@pytest.fixture(scope="module")
def material(calibration):
    return calibration.material


@pytest.fixture(scope="module")
def lf96_model(lf96, material):
    return ChamberModel(lf96, material)


@pytest.fixture(scope="module")
def cf96_model(cf96, material):
    return ChamberModel(cf96, material)


def test_material_invariants_rejected():
    with pytest.raises(ValueError):
        OgdenMaterial(mu_kPa=0.0, alpha=4.0, thickness_mm=1.0)
    with pytest.raises(ValueError):
        OgdenMaterial(mu_kPa=110.0, alpha=0.0, thickness_mm=1.0)
    with pytest.raises(ValueError):
        OgdenMaterial(mu_kPa=110.0, alpha=4.0, thickness_mm=-1.0)


def test_profile_invariants_rejected(calibration):
    base = calibration.profile
    with pytest.raises(ValueError):
        replace(base, chassis_radius_mm=base.rest_outer_radius_mm + 1.0)
    with pytest.raises(ValueError):
        replace(base, n_nodes=8)
    with pytest.raises(ValueError):
        replace(base, flange_style="XF")


def test_flange_styles_share_rest_volume(lf96, cf96, calibration):
    # Same silicone budget in both chamber designs.
    v_lf = abs(_polyline_volume(*lf96.rest_nodes()[:2]))
    v_cf = abs(_polyline_volume(*cf96.rest_nodes()[:2]))
    assert v_cf == pytest.approx(v_lf, rel=1e-3)
    p192 = replace(calibration.profile, n_nodes=192)
    v_lf2 = abs(_polyline_volume(*p192.rest_nodes()[:2]))
    v_cf2 = abs(_polyline_volume(*replace(p192, flange_style="CF").rest_nodes()[:2]))
    assert v_cf2 == pytest.approx(v_lf2, rel=5e-4)


def test_zero_pressure_keeps_rest_profile(lf96, material):
    shape = inflate(lf96, material, 0.0)
    assert shape.max_radial_displacement_mm == pytest.approx(0.0, abs=1e-9)
    assert shape.chassis_contact_pressure_kPa == 0.0
    r0, z0, _ = lf96.rest_nodes()
    assert np.allclose(shape.nodes[:, 0], r0, atol=1e-9)
    assert np.allclose(shape.nodes[:, 1], z0, atol=1e-9)


def test_invalid_pressure_rejected(lf96, material):
    with pytest.raises(ValueError):
        inflate(lf96, material, -1.0)
    with pytest.raises(ValueError):
        inflate(lf96, material, float("nan"))


def _fd_relative_error(model, r, z, pressure_kPa):
    x = model.pack(r, z)
    _, grad = model.energy_grad(x, pressure_kPa)
    fd = np.zeros_like(x)
    h = 1e-5
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        ep, _ = model.energy_grad(xp, pressure_kPa)
        em, _ = model.energy_grad(xm, pressure_kPa)
        fd[i] = (ep - em) / (2.0 * h)
    return float(np.max(np.abs(grad - fd)) / max(np.max(np.abs(fd)), 1e-12))


def test_energy_gradient_matches_finite_differences(calibration, material):
    model = _EnergyModel(replace(calibration.profile, n_nodes=48),
                         material, SolverOptions())
    rng = np.random.default_rng(7)
    # noisy configuration clear of the chassis
    r = model.r0 + rng.uniform(-0.3, 0.3, model.n) + 0.5
    z = model.z0 + rng.uniform(-0.3, 0.3, model.n)
    assert _fd_relative_error(model, r, z, 8.0) < 1e-4
    # configuration with an active chassis penalty
    r2 = model.r0 + rng.uniform(-0.2, 0.2, model.n)
    r2[model.n // 2] = model.rc - 0.5
    assert _fd_relative_error(model, r2, z, 12.0) < 1e-4


def test_scalar_outputs_invariant_under_node_roll(lf96, material):
    # The cross-section is a closed cycle: where the polyline starts is a
    # reporting choice and must not leak into any physical output.
    model = _EnergyModel(lf96, material, SolverOptions())
    x, gnorm, iters = model.solve(8.0)
    r, z = model.unpack(x)
    reference = model.shape_from(model.pack(r, z), 8.0, gnorm, iters)
    e_ref, _ = model.energy_grad(model.pack(r, z), 8.0)

    shift = 17
    rolled = _EnergyModel(lf96, material, SolverOptions())
    for attr in ("r0", "z0", "free", "L0", "rb0", "vref", "trib_area", "k_pen"):
        setattr(rolled, attr, np.roll(getattr(rolled, attr), shift))
    x_roll = rolled.pack(np.roll(r, shift), np.roll(z, shift))
    e_roll, _ = rolled.energy_grad(x_roll, 8.0)
    assert e_roll == pytest.approx(e_ref, rel=1e-12)
    permuted = rolled.shape_from(x_roll, 8.0, gnorm, iters)
    for field in ("enclosed_volume_mm3", "max_radial_displacement_mm",
                  "chassis_contact_pressure_kPa", "max_principal_stress_kPa",
                  "contact_area_mm2", "contact_force_N", "max_principal_stretch"):
        assert getattr(permuted, field) == pytest.approx(
            getattr(reference, field), rel=1e-9, abs=1e-9)


def test_contact_complementarity(calibration, chamber):
    # Penalty contact: force only where the wall presses in, penetration
    # bounded, and the product of gap and force vanishes node by node.
    shape = chamber.shape(16.0)
    model = _EnergyModel(calibration.profile, calibration.material,
                         chamber.options)
    r = shape.nodes[:, 0]
    gap = r - model.rc
    force = model.k_pen * np.maximum(0.0, -gap)
    assert np.all(force >= 0.0)
    assert gap.min() > -0.05          # penetration below the penalty tolerance
    products = np.abs(gap * force)
    assert np.all(products <= 0.05 * force + 1e-12)
    assert shape.contact_force_N > 0.0


def test_lateral_flanges_anchor_on_the_chassis(chamber, cf_chamber):
    lf = chamber.shape(16.0)
    cf = cf_chamber.shape(16.0)
    assert lf.chassis_contact_pressure_kPa > 0.0
    assert cf.contact_area_mm2 < lf.contact_area_mm2


def test_flange_nodes_stay_pinned(lf96, material):
    r0, z0, pins = lf96.rest_nodes()
    shape = inflate(lf96, material, 10.0)
    for pin in pins:
        assert shape.nodes[pin, 0] == pytest.approx(r0[pin], abs=1e-12)
        assert shape.nodes[pin, 1] == pytest.approx(z0[pin], abs=1e-12)


def test_volume_matches_pressure_work(lf96, material):
    # d(min energy)/d(pressure) must read back the enclosed volume.
    model = _EnergyModel(lf96, material, SolverOptions())
    x_lo, _, _ = model.solve(9.5)
    x_hi, _, _ = model.solve(10.5, x_lo)
    x_mid, gn, it = model.solve(10.0, x_lo)
    e_lo = model.energy_grad(x_lo, 9.5)[0]
    e_hi = model.energy_grad(x_hi, 10.5)[0]
    volume = model.shape_from(x_mid, 10.0, gn, it).enclosed_volume_mm3
    implied = -(e_hi - e_lo) / 1.0 * 1e3  # N*mm per kPa -> mm^3
    assert implied == pytest.approx(volume, rel=0.01)


def test_volume_non_decreasing_under_load(lf96_model):
    volumes = [lf96_model.shape(p).enclosed_volume_mm3 for p in (2.0, 6.0, 10.0)]
    assert volumes[0] <= volumes[1] <= volumes[2]


def test_small_pressure_response_is_linear(lf96, material):
    opts = SolverOptions(grad_tol_factor=1e-7, max_iterations=20000, restarts=4)
    eps = 0.0125
    d1 = inflate(lf96, material, eps, opts).max_radial_displacement_mm
    d2 = inflate(lf96, material, 2.0 * eps, opts).max_radial_displacement_mm
    assert d2 / d1 == pytest.approx(2.0, rel=0.05)


def test_pressure_curve_zero_only():
    # independent of mesh size; use a tiny profile for speed
    profile = ChamberProfile(flange_style="LF", footprint_width_mm=30.0,
                             rest_outer_radius_mm=30.0, chassis_radius_mm=20.0,
                             n_nodes=32)
    material = OgdenMaterial(mu_kPa=110.0, alpha=4.0, thickness_mm=1.0)
    assert pressure_curve(profile, material, [0.0]) == [(0.0, 0.0)]


def test_pressure_curve_input_validation(lf96, material):
    with pytest.raises(ValueError):
        pressure_curve(lf96, material, [])
    with pytest.raises(ValueError):
        pressure_curve(lf96, material, [-1.0, 2.0])
    with pytest.raises(ValueError):
        pressure_curve(lf96, material, [0.0, 5.0, 5.0])


def test_pressure_curve_monotone_and_warm_started(lf96, material):
    grid = [0.0, 2.0, 4.0, 6.0, 8.0]
    rows = pressure_curve(lf96, material, grid)
    assert [p for p, _ in rows] == grid
    disps = [d for _, d in rows]
    assert all(b >= a for a, b in zip(disps, disps[1:]))
    # warm-started chain reproduces the standalone solve
    assert disps[-1] == pytest.approx(
        inflate(lf96, material, 8.0).max_radial_displacement_mm, rel=1e-3)


def test_pressure_curve_csv_round_trip(tmp_path, lf96, material):
    rows = [(0.0, 0.0), (2.0, 0.75), (4.0, 1.5)]
    path = tmp_path / "curve.csv"
    write_pressure_curve_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "pressure_kPa,radial_displacement_mm"
    assert len(lines) == 4
    assert [float(x) for x in lines[2].split(",")] == [2.0, 0.75]


def test_over_inflation_fails_loudly(lf96, material):
    with pytest.raises(OverInflationError) as err:
        pressure_curve(lf96, material,
                       [0.0, 5.0, 10.0, 15.0, 20.0, 24.0, 26.0, 28.0, 30.0, 32.0])
    assert err.value.pressure_kPa >= 20.0
    assert err.value.max_stretch > err.value.stretch_cap


def test_non_convergence_carries_diagnostics(lf96, material):
    strangled = SolverOptions(max_iterations=3, restarts=1)
    with pytest.raises(ConvergenceError) as err:
        inflate(lf96, material, 10.0, strangled)
    assert err.value.pressure_kPa == 10.0
    assert err.value.grad_norm > 0.0
    assert err.value.iterations >= 0


def test_shear_probe_contract(lf96, material):
    with pytest.raises(ValueError):
        axial_stiffness(lf96, material, 5.0, 0.0)
    with pytest.raises(ValueError):
        axial_stiffness(lf96, material, 5.0, -0.5)
    result = axial_stiffness(lf96, material, 5.0, 0.5)
    assert result.lateral_displacement_mm > 0.0
    assert math.isfinite(result.axial_stiffness_N_per_mm)
    assert result.axial_stiffness_N_per_mm == (
        result.shear_force_N / result.lateral_displacement_mm)


def test_shear_stiffness_falls_with_pressure(lf96, material):
    ka = [axial_stiffness(lf96, material, p, 0.5).axial_stiffness_N_per_mm
          for p in (5.0, 10.0, 16.0)]
    assert ka[0] > ka[1] > ka[2]


def test_lateral_flanges_stiffer_at_matched_inflation(lf96, material,
                                                      lf96_model, cf96_model,
                                                      cf96):
    # Compare the two designs at equal radial displacement, not equal
    # pressure: the anchored profile needs more pressure to move as far.
    target = lf96_model.shape(5.0).max_radial_displacement_mm
    lo, hi = 0.5, 16.0
    for _ in range(18):
        mid = 0.5 * (lo + hi)
        if cf96_model.shape(round(mid, 4)).max_radial_displacement_mm < target:
            lo = mid
        else:
            hi = mid
    p_cf = round(0.5 * (lo + hi), 4)
    assert cf96_model.shape(p_cf).max_radial_displacement_mm == pytest.approx(
        target, abs=0.02)
    ka_lf = axial_stiffness(lf96, material, 5.0, 0.5).axial_stiffness_N_per_mm
    ka_cf = axial_stiffness(cf96, material, p_cf, 0.5).axial_stiffness_N_per_mm
    assert ka_lf > ka_cf


def test_radial_probe_positive_and_two_sided(lf96, material):
    pressed = radial_secant_stiffness(lf96, material, 5.0, side="press")
    pulled = radial_secant_stiffness(lf96, material, 5.0, side="pull")
    assert pressed > 0.0
    assert pulled > 0.0
    assert abs(pressed - pulled) / pressed < 0.10


def test_radial_probe_input_validation(lf96, material):
    with pytest.raises(ValueError):
        radial_secant_stiffness(lf96, material, 5.0, probe_mm=0.0)
    with pytest.raises(ValueError):
        radial_secant_stiffness(lf96, material, 5.0, side="sideways")


def test_zero_pressure_stiffness_is_purely_elastic(lf96, material, monkeypatch):
    # Strip the pressure term from the energy entirely; any pressure must
    # then read back the 0 kPa stiffness exactly.
    baseline = radial_secant_stiffness(lf96, material, 0.0)
    original = _EnergyModel.energy_grad

    def without_pressure(self, x, pressure_kPa, axial_load_N=None,
                         radial_ctrl=None):
        return original(self, x, 0.0, axial_load_N, radial_ctrl)

    monkeypatch.setattr(_EnergyModel, "energy_grad", without_pressure)
    stripped = radial_secant_stiffness(lf96, material, 6.0)
    assert stripped == pytest.approx(baseline, rel=1e-9)


def test_radial_stiffness_positive_in_calibrated_range(chamber):
    for p in (0.0, 5.0, 10.0, 16.0):
        assert chamber.radial_stiffness_N_per_mm(p) > 0.0


def test_chamber_model_caches_solves(lf96_model):
    first = lf96_model.shape(6.0)
    assert lf96_model.shape(6.0) is first
    crown = lf96_model.rest_crown_radius_mm
    assert lf96_model.free_radius_mm(6.0) == pytest.approx(
        crown + first.max_radial_displacement_mm, abs=1e-9)
