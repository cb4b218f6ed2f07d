// Axial view down the lumen: wall circle, one arc per track colored by its
// normal force, the camera center offset from the lumen axis, and a tilt
// needle. Pure functions returning a view object and an SVG string so tests
// can assert on both without a DOM.

import type { StateFrame } from "./protocol.js";

export interface TrackArc {
  index: number;
  angle_deg: number; // measured from the bottom of the lumen, track 0 down
  normal_N: number;
  intensity: number; // 0..1 relative to the most loaded track this frame
  loaded: boolean;
}

export interface CrossSectionView {
  lumen_radius_mm: number;
  arcs: TrackArc[];
  tracks_in_contact: number;
  camera_offset_mm: number;
  centered: boolean;
  tilt_deg: number;
  p1_kPa: number;
  p2_kPa: number;
  stalled: boolean;
  paused: boolean;
  stale: boolean;
}

export function crossSectionView(frame: StateFrame, stale: boolean): CrossSectionView {
  const peak = Math.max(0, ...frame.per_track_normal_N);
  const n = frame.per_track_normal_N.length;
  const arcs = frame.per_track_normal_N.map((normal, index) => ({
    index,
    angle_deg: (360 / n) * index,
    normal_N: normal,
    intensity: normal > 0 && peak > 0 ? normal / peak : 0,
    loaded: normal > 0,
  }));
  return {
    lumen_radius_mm: frame.lumen_radius_mm,
    arcs,
    tracks_in_contact: frame.tracks_in_contact,
    camera_offset_mm: frame.camera_offset_mm,
    centered: frame.camera_offset_mm === 0,
    tilt_deg: frame.tilt_deg,
    p1_kPa: frame.p1_kPa,
    p2_kPa: frame.p2_kPa,
    stalled: frame.stalled,
    paused: frame.paused,
    stale,
  };
}

const SIZE = 340;
const PAD = 26;
const ARC_SPAN_DEG = 38; // visual width of one track shoe
const DEG = Math.PI / 180;

// Screen mapping: angle 0 at the bottom of the lumen, increasing toward the
// viewer's right (SVG y grows downward).
function onCircle(cx: number, cy: number, r: number, angleDeg: number): [number, number] {
  const a = angleDeg * DEG;
  return [cx + r * Math.sin(a), cy + r * Math.cos(a)];
}

function fmt(x: number): string {
  return x.toFixed(2);
}

function arcPath(cx: number, cy: number, r: number, centerDeg: number): string {
  const [x0, y0] = onCircle(cx, cy, r, centerDeg - ARC_SPAN_DEG / 2);
  const [x1, y1] = onCircle(cx, cy, r, centerDeg + ARC_SPAN_DEG / 2);
  return `M ${fmt(x0)} ${fmt(y0)} A ${fmt(r)} ${fmt(r)} 0 0 0 ${fmt(x1)} ${fmt(y1)}`;
}

function arcColor(arc: TrackArc): string {
  if (!arc.loaded) return "var(--arc-idle)";
  const light = 68 - 30 * arc.intensity;
  return `hsl(16 88% ${light.toFixed(0)}%)`;
}

export function renderCrossSection(view: CrossSectionView): string {
  const c = SIZE / 2;
  const px = (SIZE / 2 - PAD) / view.lumen_radius_mm;
  const wallR = view.lumen_radius_mm * px;
  const arcR = wallR - 9;

  const parts: string[] = [];
  parts.push(
    `<svg class="cross-section" viewBox="0 0 ${SIZE} ${SIZE}" role="img" ` +
      `data-centered="${view.centered}" data-loaded-tracks="${view.arcs.filter((a) => a.loaded).length}">`,
  );
  parts.push(`<circle class="lumen-wall" cx="${c}" cy="${c}" r="${fmt(wallR)}"/>`);

  for (const arc of view.arcs) {
    const cls = arc.loaded ? "track-arc loaded" : "track-arc idle";
    parts.push(
      `<path class="${cls}" d="${arcPath(c, c, arcR, arc.angle_deg)}" ` +
        `stroke="${arcColor(arc)}" data-track="${arc.index}" data-normal="${arc.normal_N.toFixed(3)}"/>`,
    );
    const [lx, ly] = onCircle(c, c, arcR - 17, arc.angle_deg);
    parts.push(
      `<text class="track-label" x="${fmt(lx)}" y="${fmt(ly)}">${arc.normal_N.toFixed(2)}</text>`,
    );
  }

  // Camera center: positive offset is toward the top of the lumen.
  const my = c - view.camera_offset_mm * px;
  parts.push(`<circle class="robot-center" cx="${c}" cy="${fmt(my)}"/>`);
  const needle = wallR * 0.55;
  const tx = c + needle * Math.cos(view.tilt_deg * DEG);
  const ty = my - needle * Math.sin(view.tilt_deg * DEG);
  parts.push(`<line class="tilt-needle" x1="${c}" y1="${fmt(my)}" x2="${fmt(tx)}" y2="${fmt(ty)}"/>`);
  parts.push(
    `<text class="tilt-readout" x="${c}" y="${SIZE - 8}">tilt ${view.tilt_deg.toFixed(1)}° · ` +
      `offset ${view.camera_offset_mm.toFixed(1)} mm</text>`,
  );

  if (view.stalled) {
    parts.push(
      `<g class="stall-banner"><rect x="${c - 76}" y="${c - 22}" width="152" height="44" rx="6"/>` +
        `<text x="${c}" y="${c + 6}">STALLED</text></g>`,
    );
  }
  if (view.stale) {
    parts.push(`<g class="stale-badge"><rect x="${SIZE - 84}" y="10" width="74" height="24" rx="4"/>` +
      `<text x="${SIZE - 47}" y="27">STALE</text></g>`);
  }
  if (view.paused) {
    parts.push(`<text class="paused-badge" x="10" y="27">paused</text>`);
  }
  parts.push("</svg>");
  return parts.join("\n");
}
