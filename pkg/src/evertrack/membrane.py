"""Reduced-order model of one inflatable toroidal chamber.

The chamber is a closed silicone tube of revolution around the rigid
chassis: its cross-section is a closed polyline of nodes in the
(radial, axial) half-plane, clamped at two flange nodes.  The outer wall
bulges outward under pressure; the inner wall is squeezed against the
chassis, which is what anchors the chamber (the contact pressure there is
what the flange layout is designed around).  Equilibrium at a given
internal pressure is the local minimizer of total potential energy

    E = sum_segments W(lm, lc) * t0 * A0  -  P * V_enclosed  +  contact penalty

where each segment contributes first-order Ogden strain energy W at its
meridional stretch lm (segment elongation) and circumferential stretch lc
(mean radius ratio); incompressibility fixes the thickness stretch
lt = 1/(lm*lc).  The chassis cylinder r = chassis_radius is a one-sided
quadratic penalty; its reaction is reported as chassis contact pressure.

This is deliberately not a shell finite-element model: no bending energy,
no self-contact, no dynamics.  It is sized to capture the design
comparisons that matter for the robot (flange placement, stiffness trends,
pressure-displacement curves) at interactive cost.

Two flange placements are supported:

* ``LF`` - flanges at the lateral edges of the footprint.  The outer wall
  is a shallow circular dome spanning the whole footprint; the inner wall
  runs along the chassis between the flanges, so any positive pressure
  presses the full footprint width onto the chassis.
* ``CF`` - flanges adjacent at the axial center.  The outer wall is a
  balloon standing on a short two-walled neck; only the short run between
  the central flanges touches the chassis.  The balloon radius is solved
  at construction so the enclosed rest volume matches the LF profile of
  the same footprint.

Units: mm, N, kPa at the interface (converted to N/mm^2 internally),
energies in N*mm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import ConvergenceError, OverInflationError, StiffnessError

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OgdenMaterial:
    """First-order Ogden constants for the chamber silicone.

    The shipped defaults are a calibration fit for a soft platinum-cure
    silicone sheet (classical shear modulus is mu*alpha/2); the wall
    thickness is a calibration input, never measured on hardware.
    """

    mu_kPa: float
    alpha: float
    thickness_mm: float

    def __post_init__(self):
        if self.mu_kPa <= 0:
            raise ValueError(f"mu_kPa must be positive, got {self.mu_kPa}")
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.thickness_mm <= 0:
            raise ValueError(f"thickness_mm must be positive, got {self.thickness_mm}")


@dataclass(frozen=True)
class ChamberProfile:
    """Rest geometry of one chamber cross-section.

    flange_style "LF" puts the flanges at the lateral footprint edges,
    "CF" puts them adjacent at the axial center.  Both enclose the same
    rest volume for identical footprint parameters (the CF balloon radius
    is solved for at construction).
    """

    flange_style: str
    footprint_width_mm: float
    rest_outer_radius_mm: float
    chassis_radius_mm: float
    n_nodes: int = 192
    # shape detail knobs; defaults chosen once and left alone
    neck_gap_fraction: float = 0.20
    neck_height_fraction: float = 0.15

    def __post_init__(self):
        if self.flange_style not in ("CF", "LF"):
            raise ValueError(f"flange_style must be CF or LF, got {self.flange_style!r}")
        if not self.rest_outer_radius_mm > self.chassis_radius_mm > 0:
            raise ValueError(
                "need rest_outer_radius_mm > chassis_radius_mm > 0, got "
                f"{self.rest_outer_radius_mm} / {self.chassis_radius_mm}"
            )
        if self.footprint_width_mm <= 0:
            raise ValueError("footprint_width_mm must be positive")
        if self.footprint_width_mm >= 4.0 * (self.rest_outer_radius_mm - self.chassis_radius_mm):
            raise ValueError("footprint too wide for the rest height; dome would be degenerate")
        if self.n_nodes < 24:
            raise ValueError(f"n_nodes must be >= 24, got {self.n_nodes}")
        if not 0.05 <= self.neck_gap_fraction <= 0.5:
            raise ValueError("neck_gap_fraction outside sane range [0.05, 0.5]")

    def rest_nodes(self) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
        """Closed rest polyline: (r, z, pinned flange indices).

        The segment from the last node back to the first closes the loop;
        the two returned indices are the clamped flange nodes.
        """
        if self.flange_style == "LF":
            return _build_lf_nodes(self)
        return _build_cf_nodes(self)


def _allocate_segments(lengths: list[float], n_segments: int, minimum: int = 2) -> list[int]:
    """Split n_segments across pieces proportionally to their lengths."""
    total = sum(lengths)
    counts = [max(minimum, int(round(n_segments * ln / total))) for ln in lengths]
    # fix rounding drift on the longest piece
    counts[lengths.index(max(lengths))] += n_segments - sum(counts)
    if min(counts) < 1:
        raise ValueError("n_nodes too small for this profile")
    return counts


def _build_lf_nodes(p: ChamberProfile) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    rc, w = p.chassis_radius_mm, p.footprint_width_mm
    height = p.rest_outer_radius_mm - rc
    zw = 0.5 * w
    hc = (height * height - zw * zw) / (2.0 * height)  # dome circle center above chassis
    rho = height - hc
    tw = math.atan2(zw, -hc)  # half-angle of the dome arc, from the crown

    len_arc = 2.0 * tw * rho
    seg_arc, seg_inner = _allocate_segments([len_arc, w], p.n_nodes)

    t = np.linspace(-tw, tw, seg_arc + 1)
    z_arc = rho * np.sin(t)
    r_arc = np.maximum(rc + hc + rho * np.cos(t), rc)  # flange ends sit on the chassis
    z_inner = np.linspace(zw, -zw, seg_inner + 1)
    r_inner = np.full(seg_inner + 1, rc)

    # cycle: flange A, dome left-to-right, flange B, inner wall right-to-left.
    # The clamp rings grip the membrane over a short run, not at a point, so
    # the first dome node on each side is held too (fixes the exit angle).
    r = np.concatenate([r_arc, r_inner[1:-1]])
    z = np.concatenate([z_arc, z_inner[1:-1]])
    return r, z, (0, 1, seg_arc - 1, seg_arc)


def _cf_balloon_nodes(p: ChamberProfile, rho_b: float,
                      n_nodes: int) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    rc, w = p.chassis_radius_mm, p.footprint_width_mm
    gap = p.neck_gap_fraction * w
    h_neck = p.neck_height_fraction * (p.rest_outer_radius_mm - rc)
    if rho_b <= 0.5 * gap:
        raise ValueError("CF balloon radius must exceed half the neck gap")
    t_n = math.asin(0.5 * gap / rho_b)
    c_b = rc + h_neck + rho_b
    r_att = c_b - rho_b * math.cos(t_n)

    wall_len = r_att - rc
    arc_len = (2.0 * math.pi - 2.0 * t_n) * rho_b
    seg_wall, seg_arc, seg_wall2, seg_inner = _allocate_segments(
        [wall_len, arc_len, wall_len, gap], n_nodes
    )

    sag = 0.3 * h_neck  # slight outward pre-bow keeps the neck walls stable
    u = np.linspace(0.0, 1.0, seg_wall + 1)
    z_left = -(0.5 * gap + sag * 4.0 * u * (1.0 - u))
    r_left = rc + u * wall_len

    theta = np.linspace(-t_n, -(2.0 * math.pi - t_n), seg_arc + 1)
    z_arc = rho_b * np.sin(theta)
    r_arc = c_b - rho_b * np.cos(theta)

    u2 = np.linspace(1.0, 0.0, seg_wall2 + 1)
    z_right = 0.5 * gap + sag * 4.0 * u2 * (1.0 - u2)
    r_right = rc + u2 * wall_len

    z_inner = np.linspace(0.5 * gap, -0.5 * gap, seg_inner + 1)
    r_inner = np.full(seg_inner + 1, rc)

    # cycle: flange A, left wall, balloon, right wall, flange B, inner run.
    # As with LF, the clamp rings also hold the first wall node on each side.
    r = np.concatenate([r_left, r_arc[1:], r_right[1:], r_inner[1:-1]])
    z = np.concatenate([z_left, z_arc[1:], z_right[1:], z_inner[1:-1]])
    flange_b = seg_wall + seg_arc + seg_wall2
    return r, z, (0, 1, flange_b - 1, flange_b)


def _build_cf_nodes(p: ChamberProfile) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    # size the balloon so CF matches the LF rest volume on the same footprint
    r_lf, z_lf, _ = _build_lf_nodes(replace(p, flange_style="LF", n_nodes=400))
    v_target = _polyline_volume(r_lf, z_lf)

    def vol_err(rho_b: float) -> float:
        r, z, _ = _cf_balloon_nodes(p, rho_b, 400)
        return _polyline_volume(r, z) - v_target

    gap = p.neck_gap_fraction * p.footprint_width_mm
    rho_b = brentq(vol_err, 0.51 * gap, 0.49 * p.footprint_width_mm, xtol=1e-10)
    return _cf_balloon_nodes(p, rho_b, p.n_nodes)


def _polyline_volume(r: np.ndarray, z: np.ndarray) -> float:
    """Signed volume of revolution enclosed by the closed polyline."""
    rn = np.roll(r, -1)
    zn = np.roll(z, -1)
    q = r * r + r * rn + rn * rn
    return (math.pi / 3.0) * float(np.sum((zn - z) * q))


@dataclass(frozen=True)
class SolverOptions:
    """Tunables of the equilibrium solve; defaults are left alone in tests."""

    max_iterations: int = 5000
    grad_tol_factor: float = 1e-6  # tolerance = factor * mu_kPa * thickness_mm  [N]
    penalty_kPa_per_mm: float = 25000.0  # chassis penalty per unit contact area
    stretch_cap: float = 3.0
    contact_force_floor_N: float = 1e-9
    restarts: int = 3


@dataclass(eq=False)
class ChamberShape:
    """Equilibrium cross-section at one pressure plus its diagnostics.

    nodes is the closed polyline, one row per node, columns
    (radial_mm, axial_mm); the last row connects back to the first.
    """

    nodes: np.ndarray
    pressure_kPa: float
    enclosed_volume_mm3: float
    max_radial_displacement_mm: float
    chassis_contact_pressure_kPa: float
    max_principal_stress_kPa: float
    contact_area_mm2: float
    contact_force_N: float
    max_principal_stretch: float
    grad_norm: float
    iterations: int


class _EnergyModel:
    """Energy, gradient and diagnostics for one profile/material pair."""

    def __init__(self, profile: ChamberProfile, material: OgdenMaterial,
                 options: SolverOptions):
        self.profile = profile
        self.material = material
        self.options = options
        r0, z0, pins = profile.rest_nodes()
        self.r0, self.z0 = r0, z0
        self.n = len(r0)
        self.rc = profile.chassis_radius_mm
        self.free = np.ones(self.n, dtype=bool)
        self.free[list(pins)] = False
        self.L0 = np.hypot(np.roll(r0, -1) - r0, np.roll(z0, -1) - z0)
        if np.any(self.L0 <= 0):
            raise ValueError("degenerate rest segment in profile")
        self.rb0 = 0.5 * (r0 + np.roll(r0, -1))
        self.mu = material.mu_kPa * 1e-3  # N/mm^2
        self.alpha = material.alpha
        self.vref = material.thickness_mm * self.L0 * _TWO_PI * self.rb0
        # rest tributary arclength per node, for contact area/pressure
        trib = 0.5 * (self.L0 + np.roll(self.L0, 1))
        self.trib_area = _TWO_PI * self.rc * trib
        self.k_pen = options.penalty_kPa_per_mm * 1e-3 * self.trib_area  # N/mm per node
        self.orient = 1.0 if _polyline_volume(r0, z0) >= 0 else -1.0
        self.grad_tol = options.grad_tol_factor * material.mu_kPa * material.thickness_mm

    def pack(self, r: np.ndarray, z: np.ndarray) -> np.ndarray:
        return np.concatenate([r[self.free], z[self.free]])

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = int(np.sum(self.free))
        r = self.r0.copy()
        z = self.z0.copy()
        r[self.free] = x[:m]
        z[self.free] = x[m:]
        return r, z

    def stretches(self, r: np.ndarray, z: np.ndarray):
        length = np.hypot(np.roll(r, -1) - r, np.roll(z, -1) - z)
        length = np.maximum(length, 1e-12)
        rb = 0.5 * (r + np.roll(r, -1))
        lm = length / self.L0
        lc = rb / self.rb0
        lt = 1.0 / (lm * lc)
        return length, lm, lc, lt

    def energy_grad(self, x: np.ndarray, pressure_kPa: float,
                    axial_load_N: np.ndarray | None = None,
                    radial_ctrl: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None):
        """Total energy and gradient w.r.t. the free DOF vector.

        radial_ctrl = (weights, per-node target radii, per-node tie
        stiffness N/mm): a displacement-controlled radial probe tying the
        weighted nodes to their targets.
        """
        r, z = self.unpack(x)
        if np.any(r <= 0):
            return np.inf, np.zeros_like(x)
        length, lm, lc, lt = self.stretches(r, z)
        # wild line-search iterates: bail out before the powers overflow
        if max(lm.max(), lc.max(), lt.max()) > 100.0:
            return np.inf, np.zeros_like(x)

        a = self.alpha
        w = (2.0 * self.mu / a**2) * (lm**a + lc**a + lt**a - 3.0)
        e_el = float(np.sum(w * self.vref))

        lt_a = lt**a
        dw_dlm = (2.0 * self.mu / a) * (lm ** (a - 1.0) - lt_a / lm)
        dw_dlc = (2.0 * self.mu / a) * (lc ** (a - 1.0) - lt_a / lc)

        grad_r = np.zeros(self.n)
        grad_z = np.zeros(self.n)

        # segment elongation term; unit vectors point node i -> node i+1
        de_dlen = self.vref * dw_dlm / self.L0
        dr = np.roll(r, -1) - r
        dz = np.roll(z, -1) - z
        fr = de_dlen * dr / length
        fz = de_dlen * dz / length
        grad_r -= fr
        grad_r += np.roll(fr, 1)
        grad_z -= fz
        grad_z += np.roll(fz, 1)

        # mean-radius (hoop) term splits evenly between segment ends
        de_drb = 0.5 * self.vref * dw_dlc / self.rb0
        grad_r += de_drb + np.roll(de_drb, 1)

        # pressure-volume work over the closed cycle
        p_int = pressure_kPa * 1e-3 * self.orient
        rn = np.roll(r, -1)
        q = r * r + r * rn + rn * rn
        e_p = -pressure_kPa * 1e-3 * self.orient * (math.pi / 3.0) * float(np.sum(dz * q))
        c = math.pi / 3.0
        dv_dr = c * dz * (2.0 * r + rn)
        dv_dr_next = c * dz * (r + 2.0 * rn)
        grad_r -= p_int * (dv_dr + np.roll(dv_dr_next, 1))
        grad_z += p_int * c * (q - np.roll(q, 1))

        # chassis contact penalty
        viol = np.maximum(0.0, self.rc - r)
        e_pen = 0.5 * float(np.sum(self.k_pen * viol**2))
        grad_r -= self.k_pen * viol

        e_ext = 0.0
        if axial_load_N is not None:
            e_ext -= float(np.dot(axial_load_N, z))
            grad_z -= axial_load_N
        if radial_ctrl is not None:
            weight, target, k_node = radial_ctrl
            miss = (r - target) * weight
            e_ext += 0.5 * float(np.sum(k_node * miss**2))
            grad_r += k_node * miss * weight

        energy = e_el + e_p + e_pen + e_ext
        grad = np.concatenate([grad_r[self.free], grad_z[self.free]])
        return energy, grad

    def solve(self, pressure_kPa: float, x0: np.ndarray | None = None,
              axial_load_N: np.ndarray | None = None,
              radial_ctrl=None) -> tuple[np.ndarray, float, int]:
        """Minimize the energy; returns (free DOFs, grad max-norm, iters)."""
        if x0 is None:
            x0 = self.pack(self.r0, self.z0)
        x = x0
        total_iters = 0
        gnorm = np.inf
        for _ in range(self.options.restarts):
            res = minimize(
                self.energy_grad,
                x,
                args=(pressure_kPa, axial_load_N, radial_ctrl),
                jac=True,
                method="L-BFGS-B",
                options={
                    "maxiter": self.options.max_iterations,
                    "maxfun": 4 * self.options.max_iterations,
                    "ftol": 1e-16,
                    "gtol": 0.2 * self.grad_tol,
                },
            )
            x = res.x
            total_iters += res.nit
            _, g = self.energy_grad(x, pressure_kPa, axial_load_N, radial_ctrl)
            gnorm = float(np.max(np.abs(g))) if len(g) else 0.0
            if gnorm < self.grad_tol:
                return x, gnorm, total_iters
        raise ConvergenceError(
            f"equilibrium solve stalled at gradient max-norm {gnorm:.3e} "
            f"(tolerance {self.grad_tol:.3e}) after {total_iters} iterations",
            pressure_kPa=pressure_kPa,
            grad_norm=gnorm,
            iterations=total_iters,
        )

    def shape_from(self, x: np.ndarray, pressure_kPa: float, gnorm: float,
                   iters: int) -> ChamberShape:
        r, z = self.unpack(x)
        _, lm, lc, lt = self.stretches(r, z)
        max_stretch = float(max(np.max(lm), np.max(lc)))
        if max_stretch > self.options.stretch_cap:
            raise OverInflationError(
                f"principal stretch {max_stretch:.3f} exceeds the safety cap "
                f"{self.options.stretch_cap} at {pressure_kPa} kPa",
                pressure_kPa=pressure_kPa,
                max_stretch=max_stretch,
                stretch_cap=self.options.stretch_cap,
            )
        viol = np.maximum(0.0, self.rc - r)
        f_contact = self.k_pen * viol
        active = f_contact > self.options.contact_force_floor_N
        contact_force = float(np.sum(f_contact))
        contact_area = float(np.sum(self.trib_area[active]))
        contact_pressure = 0.0
        if np.any(active):
            contact_pressure = float(
                np.max(f_contact[active] / self.trib_area[active])
            ) * 1e3  # N/mm^2 -> kPa
        lt_a = lt**self.alpha
        s_m = (2.0 * self.mu / self.alpha) * (lm**self.alpha - lt_a)
        s_c = (2.0 * self.mu / self.alpha) * (lc**self.alpha - lt_a)
        max_stress = float(max(np.max(s_m), np.max(s_c))) * 1e3  # kPa
        return ChamberShape(
            nodes=np.column_stack([r, z]),
            pressure_kPa=pressure_kPa,
            enclosed_volume_mm3=self.orient * _polyline_volume(r, z),
            max_radial_displacement_mm=float(np.max(r - self.r0)),
            chassis_contact_pressure_kPa=contact_pressure,
            max_principal_stress_kPa=max_stress,
            contact_area_mm2=contact_area,
            contact_force_N=contact_force,
            max_principal_stretch=max_stretch,
            grad_norm=gnorm,
            iterations=iters,
        )

    def crown_band(self, r: np.ndarray, band_fraction: float = 0.15) -> np.ndarray:
        """Weights (0/1) of nodes in the outer band of the current shape."""
        lo = np.max(r) - band_fraction * (np.max(r) - self.rc)
        mask = (r >= lo).astype(float)
        mask[~self.free] = 0.0
        return mask


def inflate(profile: ChamberProfile, material: OgdenMaterial, pressure_kPa: float,
            options: SolverOptions | None = None,
            warm_start: ChamberShape | None = None) -> ChamberShape:
    """Equilibrium cross-section of the chamber at the given pressure.

    Warm-starting from a neighbouring solution keeps loading sweeps on the
    stable branch.  Raises ConvergenceError if the minimizer stalls and
    OverInflationError past the stretch safety cap.
    """
    if not math.isfinite(pressure_kPa):
        raise ValueError("pressure_kPa must be finite")
    if pressure_kPa < 0:
        raise ValueError(f"pressure_kPa must be >= 0, got {pressure_kPa}")
    opts = options or SolverOptions()
    model = _EnergyModel(profile, material, opts)
    x0 = None
    if warm_start is not None:
        x0 = model.pack(warm_start.nodes[:, 0], warm_start.nodes[:, 1])
    x, gnorm, iters = model.solve(pressure_kPa, x0)
    return model.shape_from(x, pressure_kPa, gnorm, iters)


def pressure_curve(profile: ChamberProfile, material: OgdenMaterial,
                   pressures: list[float],
                   options: SolverOptions | None = None) -> list[tuple[float, float]]:
    """(pressure, max radial displacement) rows along a warm-started sweep."""
    ps = list(pressures)
    if not ps:
        raise ValueError("pressures must be non-empty")
    if ps[0] < 0:
        raise ValueError("pressures must start at >= 0")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("pressures must be strictly increasing")
    rows = []
    prev = None
    for p in ps:
        try:
            prev = inflate(profile, material, p, options, warm_start=prev)
        except (ConvergenceError, OverInflationError) as exc:
            exc.pressure_kPa = p
            raise
        rows.append((p, prev.max_radial_displacement_mm))
    return rows


def write_pressure_curve_csv(rows: list[tuple[float, float]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("pressure_kPa,radial_displacement_mm\n")
        for p, d in rows:
            fh.write(f"{p:.6g},{d:.9g}\n")


@dataclass(frozen=True)
class StiffnessResult:
    """Shear probe outcome: k_a = force / max axial displacement."""

    shear_force_N: float
    lateral_displacement_mm: float
    axial_stiffness_N_per_mm: float


def axial_stiffness(profile: ChamberProfile, material: OgdenMaterial,
                    pressure_kPa: float, shear_force_N: float,
                    options: SolverOptions | None = None,
                    band_fraction: float = 0.15) -> StiffnessResult:
    """Resistance of the inflated chamber to axial drag on its outer face.

    An axial traction of total magnitude shear_force_N is spread over the
    outer crown band (weighted by tributary area) and the equilibrium is
    re-solved from the inflated state.  The displacement d is the largest
    axial motion of a loaded node measured from the rest configuration,
    the way a stiffness probe reads total axial motion of the surface it
    grips: inflating the chamber itself bulges the crown band axially, so
    k_a = F/d falls as pressure rises even though the membrane tension
    grows.  An anchored profile that holds its shape under pressure reads
    stiffer than one that billows.
    """
    if shear_force_N <= 0:
        raise ValueError(f"shear_force_N must be positive, got {shear_force_N}")
    opts = options or SolverOptions()
    model = _EnergyModel(profile, material, opts)
    x_free, _, _ = model.solve(pressure_kPa)
    r, z = model.unpack(x_free)
    mask = model.crown_band(r, band_fraction)
    weights = mask * model.trib_area
    total = float(np.sum(weights))
    if total <= 0:
        raise StiffnessError("no crown nodes found to load")
    load = shear_force_N * weights / total
    x_loaded, _, _ = model.solve(pressure_kPa, x_free, axial_load_N=load)
    _, z_loaded = model.unpack(x_loaded)
    disp = float(np.max(np.abs((z_loaded - model.z0) * (mask > 0))))
    if disp < 1e-9:
        raise StiffnessError(
            f"axial displacement {disp:.2e} mm below the numerical floor"
        )
    return StiffnessResult(
        shear_force_N=shear_force_N,
        lateral_displacement_mm=disp,
        axial_stiffness_N_per_mm=shear_force_N / disp,
    )


def radial_secant_stiffness(profile: ChamberProfile, material: OgdenMaterial,
                            pressure_kPa: float,
                            options: SolverOptions | None = None,
                            probe_mm: float = 0.4,
                            side: str = "press") -> float:
    """Restoring force per unit imposed crown displacement, N/mm.

    Displacement-controlled probe: every node currently within half a
    probe depth of the crown is shifted radially by probe_mm ("press"
    inward, "pull" outward) through stiff ties, and the tie reaction is
    read back.  Press mimics a track seat pushing the crown in; the pull
    direction exists to verify the secant is two-sided symmetric.  Feeds
    the series-spring robot-wall contact model.
    """
    if probe_mm <= 0:
        raise ValueError(f"probe_mm must be positive, got {probe_mm}")
    if side not in ("press", "pull"):
        raise ValueError(f"side must be press or pull, got {side!r}")
    opts = options or SolverOptions()
    model = _EnergyModel(profile, material, opts)
    x_free, _, _ = model.solve(pressure_kPa)
    r, z = model.unpack(x_free)
    crown = float(np.max(r))
    weight = (r >= crown - 0.5 * probe_mm).astype(float)
    weight[~model.free] = 0.0
    sign = -1.0 if side == "press" else 1.0
    target = r + sign * probe_mm
    k_node = model.k_pen * 40.0  # much stiffer than the membrane response
    ctrl = (weight, target, k_node)
    x_ctrl, _, _ = model.solve(pressure_kPa, x_free, radial_ctrl=ctrl)
    r2, _ = model.unpack(x_ctrl)
    force = abs(float(np.sum(k_node * (r2 - target) * weight)))
    if force <= 0:
        raise StiffnessError("radial probe produced no reaction force")
    return force / probe_mm


class ChamberModel:
    """Cached equilibrium solutions for one chamber; the contact handle.

    Memoizes inflate() per pressure (warm-starting each new solve from the
    nearest solved pressure below it) and exposes the two quantities the
    robot-level contact model needs: free outer radius and radial secant
    stiffness.  Instances are not safe for concurrent mutation; give each
    worker its own.
    """

    def __init__(self, profile: ChamberProfile, material: OgdenMaterial,
                 options: SolverOptions | None = None):
        self.profile = profile
        self.material = material
        self.options = options or SolverOptions()
        self._shapes: dict[float, ChamberShape] = {}
        self._stiffness: dict[float, float] = {}
        self._rest_crown = float(np.max(profile.rest_nodes()[0]))

    @property
    def rest_crown_radius_mm(self) -> float:
        return self._rest_crown

    def shape(self, pressure_kPa: float) -> ChamberShape:
        key = round(float(pressure_kPa), 9)
        if key not in self._shapes:
            warm = None
            below = [p for p in self._shapes if p <= key]
            if below:
                warm = self._shapes[max(below)]
            self._shapes[key] = inflate(
                self.profile, self.material, key, self.options, warm_start=warm
            )
        return self._shapes[key]

    def free_radius_mm(self, pressure_kPa: float) -> float:
        return float(np.max(self.shape(pressure_kPa).nodes[:, 0]))

    def radial_stiffness_N_per_mm(self, pressure_kPa: float) -> float:
        key = round(float(pressure_kPa), 9)
        if key not in self._stiffness:
            self.shape(key)  # fail early on over-inflation before probing
            self._stiffness[key] = radial_secant_stiffness(
                self.profile, self.material, key, self.options
            )
        return self._stiffness[key]
