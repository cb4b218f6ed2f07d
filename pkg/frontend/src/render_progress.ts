// Side view of the run: where the robot is along the lumen centerline, which
// elbows the tether is already bent around, and sparklines for speed and
// traction margin. Same pure view-object + SVG-string split as the cross
// section.

import type { Geometry, StateFrame } from "./protocol.js";
import type { HistoryPoint } from "./viewmodel.js";

export interface Sparkline {
  label: string;
  unit: string;
  points: number[];
  lo: number;
  hi: number;
  // Horizontal reference drawn across the chart (theoretical speed, zero margin).
  reference: number | null;
}

export interface ProgressView {
  length_mm: number;
  s_mm: number;
  fraction: number;
  complete: boolean;
  tether_elbows: number;
  speed: Sparkline;
  margin: Sparkline;
}

const END_TOL_MM = 1e-6;

export function progressView(
  geometry: Geometry,
  history: readonly HistoryPoint[],
  latest: StateFrame | null,
): ProgressView {
  const length = geometry.lumen_length_mm;
  const s = latest ? latest.s_mm : 0;
  // Done when the nose reaches the far end, or backs out of the near end.
  const complete =
    latest !== null && (s >= length - END_TOL_MM || (s <= END_TOL_MM && latest.v_mmps < 0));

  const bound = geometry.theoretical_speed_mmps;
  // The transmission cannot exceed the no-slip track speed, so the sparkline
  // axis is pinned to that line and samples are clipped to it.
  const speedPoints = history.map((h) => Math.min(Math.abs(h.v_mmps), bound));
  const speed: Sparkline = { label: "speed", unit: "mm/s", points: speedPoints, lo: 0, hi: bound, reference: bound };

  const margins = history.map((h) => h.traction_margin_N);
  const lo = Math.min(0, ...margins);
  const hi = Math.max(0.5, ...margins);
  const margin: Sparkline = { label: "traction margin", unit: "N", points: margins, lo, hi, reference: 0 };

  // Tether drag grows each time the robot drags the tether past another elbow.
  const tetherElbows = geometry.elbows_mm.filter(([s0]) => s > s0).length;

  return {
    length_mm: length,
    s_mm: s,
    fraction: length > 0 ? Math.min(1, Math.max(0, s / length)) : 0,
    complete,
    tether_elbows: tetherElbows,
    speed,
    margin,
  };
}

const W = 680;
const H = 230;
const PAD_X = 24;
const BAR_Y = 46;

function fmt(x: number): string {
  return x.toFixed(2);
}

function xAt(s: number, length: number): number {
  return PAD_X + (s / length) * (W - 2 * PAD_X);
}

function sparklineSvg(spark: Sparkline, x: number, y: number, w: number, h: number): string {
  const parts: string[] = [];
  const span = spark.hi - spark.lo || 1;
  const yAt = (v: number): number => y + h - ((v - spark.lo) / span) * h;
  parts.push(`<g class="sparkline" data-label="${spark.label}">`);
  parts.push(`<rect class="spark-frame" x="${x}" y="${y}" width="${w}" height="${h}"/>`);
  if (spark.reference !== null) {
    const ry = yAt(spark.reference);
    parts.push(`<line class="spark-reference" x1="${x}" y1="${fmt(ry)}" x2="${x + w}" y2="${fmt(ry)}"/>`);
  }
  if (spark.points.length >= 2) {
    const n = spark.points.length;
    const pts = spark.points
      .map((v, i) => `${fmt(x + (i / (n - 1)) * w)},${fmt(yAt(v))}`)
      .join(" ");
    parts.push(`<polyline class="spark-trace" points="${pts}"/>`);
  }
  const last = spark.points.at(-1);
  const readout = last === undefined ? "–" : `${last.toFixed(2)} ${spark.unit}`;
  parts.push(`<text class="spark-label" x="${x}" y="${y - 6}">${spark.label}: ${readout}</text>`);
  parts.push("</g>");
  return parts.join("\n");
}

export function renderProgress(view: ProgressView, geometry: Geometry): string {
  const length = view.length_mm;
  const parts: string[] = [];
  parts.push(
    `<svg class="progress" viewBox="0 0 ${W} ${H}" role="img" ` +
      `data-complete="${view.complete}" data-tether-elbows="${view.tether_elbows}">`,
  );

  // Centerline with elbow segments drawn heavier than straights.
  for (const seg of geometry.segments) {
    const x0 = xAt(seg.s0_mm, length);
    const x1 = xAt(seg.s1_mm, length);
    parts.push(
      `<rect class="segment ${seg.kind}" x="${fmt(x0)}" y="${seg.kind === "elbow" ? BAR_Y - 7 : BAR_Y - 3}" ` +
        `width="${fmt(x1 - x0)}" height="${seg.kind === "elbow" ? 14 : 6}" data-kind="${seg.kind}"/>`,
    );
  }
  for (const s of geometry.supports_mm) {
    const x = xAt(s, length);
    parts.push(`<line class="support-tick" x1="${fmt(x)}" y1="${BAR_Y + 10}" x2="${fmt(x)}" y2="${BAR_Y + 18}"/>`);
  }
  const rx = xAt(Math.min(view.s_mm, length), length);
  parts.push(`<circle class="robot-pos" cx="${fmt(rx)}" cy="${BAR_Y}" r="7"/>`);
  parts.push(
    `<text class="progress-readout" x="${PAD_X}" y="${BAR_Y - 18}">` +
      `s = ${view.s_mm.toFixed(1)} / ${length.toFixed(0)} mm · tether around ${view.tether_elbows} elbow${view.tether_elbows === 1 ? "" : "s"}</text>`,
  );
  if (view.complete) {
    parts.push(`<text class="complete-flag" x="${W - PAD_X}" y="${BAR_Y - 18}">lumen traversed</text>`);
  }

  const sw = (W - 3 * PAD_X) / 2;
  parts.push(sparklineSvg(view.speed, PAD_X, 104, sw, 96));
  parts.push(sparklineSvg(view.margin, 2 * PAD_X + sw, 104, sw, 96));
  parts.push("</svg>");
  return parts.join("\n");
}
