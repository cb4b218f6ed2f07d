"""Named calibration files: every physical constant in one document.

A calibration is a YAML document that pins the whole physical surface of
the simulator: membrane material and chamber geometry, drivetrain,
track set, body geometry, contact constants, sliding-drag coefficients,
tether drag, and the operator pressure limits.  Scenario files never
carry physical constants of their own; they reference a calibration by
name (resolved against the packaged data directory) or by path, and may
override individual keys under their `robot:` block.

The shipped `default` calibration is a one-time fit to the bench
measurements quoted in the README; tests pin its values, so editing it
is a recalibration, not a tweak.

All keys carry explicit unit suffixes (_mm, _kPa, _N, _deg, _rpm, ...).
Unknown or malformed keys fail loudly with the full key path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from hashlib import sha256
from importlib import resources
from pathlib import Path

import yaml

from .contact import RobotGeometry, TrackSet
from .errors import ScenarioError
from .membrane import ChamberModel, ChamberProfile, OgdenMaterial
from .navigation import ResistanceModel, RobotModel, TetherModel
from .transmission import GearheadParams, WormGearParams, drivetrain_forces

CALIBRATION_VERSION = 1

_MISSING = object()


# -- document plumbing -------------------------------------------------------
#
# Tiny typed-fetch helpers shared with the scenario parser.  Every failure
# names the full key path so a bad document is a one-look fix.


def mapping_at(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(
            f"{path} must be a mapping, got {type(value).__name__}", field=path
        )
    return value


def reject_unknown_keys(doc: dict, allowed: set[str], path: str) -> None:
    for key in doc:
        if key not in allowed:
            raise ScenarioError(
                f"unknown key '{key}' under {path} "
                f"(allowed: {', '.join(sorted(allowed))})",
                field=f"{path}.{key}",
            )


def _fetch(doc: dict, key: str, path: str, default):
    if key in doc:
        return doc[key]
    if default is _MISSING:
        raise ScenarioError(f"missing required key {path}.{key}", field=f"{path}.{key}")
    return default


def number_at(doc: dict, key: str, path: str, *, default=_MISSING,
              minimum: float | None = None, maximum: float | None = None) -> float:
    raw = _fetch(doc, key, path, default)
    if raw is default and default is not _MISSING:
        return default
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioError(
            f"{path}.{key} must be a number, got {raw!r}", field=f"{path}.{key}"
        )
    value = float(raw)
    if not math.isfinite(value):
        raise ScenarioError(f"{path}.{key} must be finite", field=f"{path}.{key}")
    if minimum is not None and value < minimum:
        raise ScenarioError(
            f"{path}.{key} must be >= {minimum}, got {value}", field=f"{path}.{key}"
        )
    if maximum is not None and value > maximum:
        raise ScenarioError(
            f"{path}.{key} must be <= {maximum}, got {value}", field=f"{path}.{key}"
        )
    return value


def integer_at(doc: dict, key: str, path: str, *, default=_MISSING,
               minimum: int | None = None) -> int:
    raw = _fetch(doc, key, path, default)
    if raw is default and default is not _MISSING:
        return default
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ScenarioError(
            f"{path}.{key} must be an integer, got {raw!r}", field=f"{path}.{key}"
        )
    if minimum is not None and raw < minimum:
        raise ScenarioError(
            f"{path}.{key} must be >= {minimum}, got {raw}", field=f"{path}.{key}"
        )
    return raw


def boolean_at(doc: dict, key: str, path: str, *, default=_MISSING) -> bool:
    raw = _fetch(doc, key, path, default)
    if raw is default and default is not _MISSING:
        return default
    if not isinstance(raw, bool):
        raise ScenarioError(
            f"{path}.{key} must be true or false, got {raw!r}", field=f"{path}.{key}"
        )
    return raw


def string_at(doc: dict, key: str, path: str, *, default=_MISSING,
              choices: tuple[str, ...] | None = None) -> str:
    raw = _fetch(doc, key, path, default)
    if raw is default and default is not _MISSING:
        return default
    if not isinstance(raw, str):
        raise ScenarioError(
            f"{path}.{key} must be a string, got {raw!r}", field=f"{path}.{key}"
        )
    if choices is not None and raw not in choices:
        raise ScenarioError(
            f"{path}.{key} must be one of {', '.join(choices)}, got '{raw}'",
            field=f"{path}.{key}",
        )
    return raw


def numbers_at(doc: dict, key: str, path: str, *, default=_MISSING,
               minimum: float | None = None) -> tuple[float, ...]:
    raw = _fetch(doc, key, path, default)
    if raw is default and default is not _MISSING:
        return default
    if not isinstance(raw, (list, tuple)):
        raise ScenarioError(
            f"{path}.{key} must be a list of numbers", field=f"{path}.{key}"
        )
    out = []
    for i, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ScenarioError(
                f"{path}.{key}[{i}] must be a number, got {item!r}",
                field=f"{path}.{key}[{i}]",
            )
        v = float(item)
        if minimum is not None and v < minimum:
            raise ScenarioError(
                f"{path}.{key}[{i}] must be >= {minimum}, got {v}",
                field=f"{path}.{key}[{i}]",
            )
        out.append(v)
    return tuple(out)


def document_digest(*documents) -> str:
    """Stable content hash over parsed documents (key order ignored)."""
    blob = json.dumps(documents, sort_keys=True, separators=(",", ":"))
    return sha256(blob.encode()).hexdigest()


def load_yaml_document(path: Path, what: str) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {what} file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{what} file {path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{what} file {path} must hold a mapping at top level")
    return doc


# -- calibration model --------------------------------------------------------


@dataclass(frozen=True)
class Calibration:
    """Typed view of one calibration document."""

    name: str
    material: OgdenMaterial
    profile: ChamberProfile
    worm: WormGearParams
    gearhead: GearheadParams
    tracks: TrackSet
    geometry: RobotGeometry
    resistance: ResistanceModel
    tether: TetherModel
    collapse_preload_N: float
    drape_stiffness_N_per_mm: float
    bench_stiffness_N_per_mm: float
    slip_exponent: float
    pressure_quantum_kPa: float
    max_pressure_kPa: float
    phantom_inflations_kPa: tuple[float, ...]
    matched_interference_mm: float
    traction_pressures_kPa: tuple[float, ...]
    document: dict

    def build_robot(self, chamber: ChamberModel | None = None) -> RobotModel:
        """Assemble the robot model; pass a chamber to share its cache."""
        if chamber is None:
            chamber = ChamberModel(self.profile, self.material)
        return RobotModel(
            chamber=chamber,
            tracks=self.tracks,
            geometry=self.geometry,
            forces=drivetrain_forces(self.gearhead, self.worm),
            pitch_mm=self.worm.pitch_mm,
            max_motor_speed_radps=self.gearhead.max_motor_speed_radps,
            gear_ratio=self.gearhead.gear_ratio,
            collapse_preload_N=self.collapse_preload_N,
            drape_stiffness_N_per_mm=self.drape_stiffness_N_per_mm,
            bench_stiffness_N_per_mm=self.bench_stiffness_N_per_mm,
            resistance=self.resistance,
            pressure_quantum_kPa=self.pressure_quantum_kPa,
        )

    @property
    def digest(self) -> str:
        return document_digest(self.document)

    def with_overrides(self, overrides: dict, path: str) -> "Calibration":
        """New calibration with scenario-level key overrides applied.

        Overrides use the same nested layout as the calibration file;
        unknown keys fail with the full path under `path`.
        """
        if not overrides:
            return self
        merged = _deep_merge(self.document, overrides, path)
        return _from_document(merged, name=f"{self.name}+overrides")


def _deep_merge(base: dict, override: dict, path: str) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if key not in base:
            raise ScenarioError(
                f"unknown key '{key}' under {path} "
                f"(allowed: {', '.join(sorted(base))})",
                field=f"{path}.{key}",
            )
        if isinstance(base[key], dict):
            merged[key] = _deep_merge(
                base[key], mapping_at(value, f"{path}.{key}"), f"{path}.{key}"
            )
        else:
            merged[key] = value
    return merged


def _data_dir():
    return resources.files("evertrack").joinpath("data")


def resolve_calibration_path(name_or_path: str | Path) -> Path:
    """Bare names resolve against the packaged data directory."""
    text = str(name_or_path)
    if "/" in text or text.endswith((".yaml", ".yml")):
        return Path(text)
    packaged = _data_dir().joinpath(f"{text}_calibration.yaml")
    with resources.as_file(packaged) as concrete:
        if not concrete.exists():
            raise ScenarioError(
                f"no packaged calibration named '{text}'", field="calibration"
            )
        return Path(concrete)


def load_calibration(name_or_path: str | Path = "default") -> Calibration:
    path = resolve_calibration_path(name_or_path)
    doc = load_yaml_document(path, "calibration")
    return _from_document(doc, name=str(name_or_path))


def _from_document(doc: dict, *, name: str) -> Calibration:
    reject_unknown_keys(
        doc,
        {
            "calibration_version", "membrane", "transmission", "tracks",
            "geometry", "contact", "resistance", "tether", "navigation",
            "limits", "suite",
        },
        "calibration",
    )
    version = integer_at(doc, "calibration_version", "calibration", minimum=1)
    if version != CALIBRATION_VERSION:
        raise ScenarioError(
            f"calibration_version {version} not supported "
            f"(expected {CALIBRATION_VERSION})",
            field="calibration.calibration_version",
        )

    mem = mapping_at(_fetch(doc, "membrane", "calibration", _MISSING), "membrane")
    reject_unknown_keys(mem, {"material", "profile"}, "membrane")
    mat = mapping_at(_fetch(mem, "material", "membrane", _MISSING), "membrane.material")
    reject_unknown_keys(mat, {"mu_kPa", "alpha", "thickness_mm"}, "membrane.material")
    material = OgdenMaterial(
        mu_kPa=number_at(mat, "mu_kPa", "membrane.material", minimum=1e-6),
        alpha=number_at(mat, "alpha", "membrane.material"),
        thickness_mm=number_at(mat, "thickness_mm", "membrane.material", minimum=1e-6),
    )
    prof = mapping_at(_fetch(mem, "profile", "membrane", _MISSING), "membrane.profile")
    reject_unknown_keys(
        prof,
        {"flange_style", "footprint_width_mm", "rest_outer_radius_mm",
         "chassis_radius_mm", "n_nodes"},
        "membrane.profile",
    )
    profile = ChamberProfile(
        flange_style=string_at(prof, "flange_style", "membrane.profile",
                               choices=("LF", "CF")),
        footprint_width_mm=number_at(prof, "footprint_width_mm", "membrane.profile",
                                     minimum=1e-3),
        rest_outer_radius_mm=number_at(prof, "rest_outer_radius_mm",
                                       "membrane.profile", minimum=1e-3),
        chassis_radius_mm=number_at(prof, "chassis_radius_mm", "membrane.profile",
                                    minimum=1e-3),
        n_nodes=integer_at(prof, "n_nodes", "membrane.profile", default=192,
                           minimum=48),
    )

    trans = mapping_at(_fetch(doc, "transmission", "calibration", _MISSING),
                       "transmission")
    reject_unknown_keys(trans, {"worm", "gearhead"}, "transmission")
    wormdoc = mapping_at(_fetch(trans, "worm", "transmission", _MISSING),
                         "transmission.worm")
    reject_unknown_keys(
        wormdoc,
        {"pitch_mm", "pitch_diameter_mm", "lead_angle_deg", "pressure_angle_deg"},
        "transmission.worm",
    )
    worm = WormGearParams(
        pitch_mm=number_at(wormdoc, "pitch_mm", "transmission.worm", minimum=1e-3),
        pitch_diameter_mm=number_at(wormdoc, "pitch_diameter_mm",
                                    "transmission.worm", minimum=1e-3),
        lead_angle_rad=math.radians(
            number_at(wormdoc, "lead_angle_deg", "transmission.worm",
                      minimum=0.1, maximum=45.0)
        ),
        pressure_angle_rad=math.radians(
            number_at(wormdoc, "pressure_angle_deg", "transmission.worm",
                      minimum=0.0, maximum=45.0)
        ),
    )
    geardoc = mapping_at(_fetch(trans, "gearhead", "transmission", _MISSING),
                         "transmission.gearhead")
    reject_unknown_keys(
        geardoc,
        {"motor_torque_Nmm", "gear_ratio", "efficiency", "max_motor_speed_rpm"},
        "transmission.gearhead",
    )
    gearhead = GearheadParams(
        motor_torque_Nmm=number_at(geardoc, "motor_torque_Nmm",
                                   "transmission.gearhead", minimum=1e-6),
        gear_ratio=number_at(geardoc, "gear_ratio", "transmission.gearhead",
                             minimum=1.0),
        efficiency=number_at(geardoc, "efficiency", "transmission.gearhead",
                             minimum=1e-3, maximum=1.0),
        max_motor_speed_radps=number_at(geardoc, "max_motor_speed_rpm",
                                        "transmission.gearhead", minimum=1.0)
        * 2.0 * math.pi / 60.0,
    )

    trackdoc = mapping_at(_fetch(doc, "tracks", "calibration", _MISSING), "tracks")
    reject_unknown_keys(
        trackdoc,
        {"n_tracks", "mu_track_lumen", "mu_track_chamber",
         "track_band_stiffness_N_per_mm", "guide_compliance",
         "max_guide_opening_deg"},
        "tracks",
    )
    tracks = TrackSet(
        n_tracks=integer_at(trackdoc, "n_tracks", "tracks", minimum=3),
        mu_track_lumen=number_at(trackdoc, "mu_track_lumen", "tracks", minimum=0.0),
        mu_track_chamber=number_at(trackdoc, "mu_track_chamber", "tracks",
                                   minimum=0.0),
        track_band_stiffness_N_per_mm=number_at(
            trackdoc, "track_band_stiffness_N_per_mm", "tracks", minimum=1e-6),
        guide_compliance=number_at(trackdoc, "guide_compliance", "tracks",
                                   minimum=0.0, maximum=1.0),
        max_guide_opening_deg=number_at(trackdoc, "max_guide_opening_deg", "tracks",
                                        minimum=0.0, maximum=120.0),
    )

    geodoc = mapping_at(_fetch(doc, "geometry", "calibration", _MISSING), "geometry")
    reject_unknown_keys(
        geodoc,
        {"track_thickness_mm", "chamber_spacing_mm", "mass_kg",
         "nose_overhang_mm", "chamber_seat_area_mm2",
         "crown_stop_clearance_mm", "backstop_stiffness_N_per_mm"},
        "geometry",
    )
    geometry = RobotGeometry(
        track_thickness_mm=number_at(geodoc, "track_thickness_mm", "geometry",
                                     minimum=1e-3),
        chamber_spacing_mm=number_at(geodoc, "chamber_spacing_mm", "geometry",
                                     minimum=1e-3),
        mass_kg=number_at(geodoc, "mass_kg", "geometry", minimum=0.0),
        nose_overhang_mm=number_at(geodoc, "nose_overhang_mm", "geometry",
                                   minimum=1e-3),
        chamber_seat_area_mm2=number_at(geodoc, "chamber_seat_area_mm2", "geometry",
                                        minimum=1e-3),
        crown_stop_clearance_mm=number_at(geodoc, "crown_stop_clearance_mm",
                                          "geometry", minimum=1e-3),
        backstop_stiffness_N_per_mm=number_at(geodoc, "backstop_stiffness_N_per_mm",
                                              "geometry", minimum=1e-3),
    )

    contactdoc = mapping_at(_fetch(doc, "contact", "calibration", _MISSING), "contact")
    reject_unknown_keys(
        contactdoc,
        {"collapse_preload_N", "drape_stiffness_N_per_mm",
         "bench_stiffness_N_per_mm"},
        "contact",
    )
    collapse_preload = number_at(contactdoc, "collapse_preload_N", "contact",
                                 minimum=0.0)
    drape_stiffness = number_at(contactdoc, "drape_stiffness_N_per_mm", "contact",
                                minimum=1e-9)
    bench_stiffness = number_at(contactdoc, "bench_stiffness_N_per_mm", "contact",
                                minimum=1e-9)

    resdoc = mapping_at(_fetch(doc, "resistance", "calibration", _MISSING),
                        "resistance")
    reject_unknown_keys(
        resdoc,
        {"hug_fraction_rigid", "hug_fraction_elastic", "hug_fraction_collapsed",
         "plow_N", "backward_factor", "lubrication_factor"},
        "resistance",
    )
    resistance = ResistanceModel(
        hug_fraction_rigid=number_at(resdoc, "hug_fraction_rigid", "resistance",
                                     minimum=0.0, maximum=1.0),
        hug_fraction_elastic=number_at(resdoc, "hug_fraction_elastic", "resistance",
                                       minimum=0.0, maximum=1.0),
        hug_fraction_collapsed=number_at(resdoc, "hug_fraction_collapsed",
                                         "resistance", minimum=0.0, maximum=1.0),
        plow_N=number_at(resdoc, "plow_N", "resistance", minimum=0.0),
        backward_factor=number_at(resdoc, "backward_factor", "resistance",
                                  minimum=1e-3, maximum=1.0),
        lubrication_factor=number_at(resdoc, "lubrication_factor", "resistance",
                                     minimum=1e-3, maximum=1.0),
    )

    tetherdoc = mapping_at(_fetch(doc, "tether", "calibration", _MISSING), "tether")
    reject_unknown_keys(tetherdoc, {"drag_per_flexure_N", "cap_N"}, "tether")
    tether = TetherModel(
        drag_per_flexure_N=number_at(tetherdoc, "drag_per_flexure_N", "tether",
                                     minimum=0.0),
        cap_N=number_at(tetherdoc, "cap_N", "tether", minimum=0.0),
    )

    navdoc = mapping_at(_fetch(doc, "navigation", "calibration", _MISSING),
                        "navigation")
    reject_unknown_keys(navdoc, {"slip_exponent", "pressure_quantum_kPa"},
                        "navigation")
    slip_exponent = number_at(navdoc, "slip_exponent", "navigation", minimum=1.0)
    quantum = number_at(navdoc, "pressure_quantum_kPa", "navigation", minimum=1e-6)

    limitsdoc = mapping_at(_fetch(doc, "limits", "calibration", _MISSING), "limits")
    reject_unknown_keys(limitsdoc, {"max_pressure_kPa"}, "limits")
    max_pressure = number_at(limitsdoc, "max_pressure_kPa", "limits", minimum=0.1)

    suitedoc = mapping_at(_fetch(doc, "suite", "calibration", _MISSING), "suite")
    reject_unknown_keys(
        suitedoc,
        {"phantom_inflations_kPa", "matched_interference_mm",
         "traction_pressures_kPa"},
        "suite",
    )
    phantom_inflations = numbers_at(suitedoc, "phantom_inflations_kPa", "suite",
                                    minimum=0.0)
    matched_interference = number_at(suitedoc, "matched_interference_mm", "suite",
                                     minimum=0.0)
    traction_pressures = numbers_at(suitedoc, "traction_pressures_kPa", "suite",
                                    minimum=0.0)

    return Calibration(
        name=name,
        material=material,
        profile=profile,
        worm=worm,
        gearhead=gearhead,
        tracks=tracks,
        geometry=geometry,
        resistance=resistance,
        tether=tether,
        collapse_preload_N=collapse_preload,
        drape_stiffness_N_per_mm=drape_stiffness,
        bench_stiffness_N_per_mm=bench_stiffness,
        slip_exponent=slip_exponent,
        pressure_quantum_kPa=quantum,
        max_pressure_kPa=max_pressure,
        phantom_inflations_kPa=phantom_inflations,
        matched_interference_mm=matched_interference,
        traction_pressures_kPa=traction_pressures,
        document=doc,
    )
