// Single source of truth for everything the console shows. Renderers read the
// latest frame from here and nowhere else, so a stale slider or a cached
// number can never leak into the view.

import type { CommandPayload, Geometry, ServerFrame, StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "live" | "stale" | "closed";

export interface HistoryPoint {
  time_s: number;
  s_mm: number;
  v_mmps: number;
  traction_margin_N: number;
}

export interface ViewModelOptions {
  // Injectable clock so staleness is testable without waiting a wall second.
  now?: () => number;
  staleAfterMs?: number;
  historyCapacity?: number;
}

const DEFAULT_STALE_MS = 1000;
const DEFAULT_HISTORY = 240; // 12 s of sparkline at 20 Hz

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, x));
}

export class ConsoleViewModel {
  readonly geometry: Geometry;
  latest: StateFrame | null = null;
  endedReason: string | null = null;

  private readonly now: () => number;
  private readonly staleAfterMs: number;
  private readonly capacity: number;
  private lastFrameAtMs: number | null = null;
  private ring: HistoryPoint[] = [];
  private widget: CommandPayload = { motor_speed_radps: 0, p1_kPa: 0, p2_kPa: 0, pause: false };

  constructor(geometry: Geometry, options: ViewModelOptions = {}) {
    this.geometry = geometry;
    this.now = options.now ?? (() => Date.now());
    this.staleAfterMs = options.staleAfterMs ?? DEFAULT_STALE_MS;
    this.capacity = options.historyCapacity ?? DEFAULT_HISTORY;
  }

  ingest(frame: ServerFrame): void {
    if (frame.type === "end") {
      this.endedReason = frame.reason;
      return;
    }
    this.latest = frame;
    this.lastFrameAtMs = this.now();
    this.ring.push({
      time_s: frame.time_s,
      s_mm: frame.s_mm,
      v_mmps: frame.v_mmps,
      traction_margin_N: frame.traction_margin_N,
    });
    if (this.ring.length > this.capacity) {
      this.ring.splice(0, this.ring.length - this.capacity);
    }
  }

  markClosed(reason = "connection closed"): void {
    if (this.endedReason === null) this.endedReason = reason;
  }

  status(): ConnectionStatus {
    if (this.endedReason !== null) return "closed";
    if (this.lastFrameAtMs === null) return "connecting";
    return this.now() - this.lastFrameAtMs > this.staleAfterMs ? "stale" : "live";
  }

  // Drives the stale badge: true once frames stop arriving for staleAfterMs.
  stale(): boolean {
    return this.status() === "stale";
  }

  history(): readonly HistoryPoint[] {
    return this.ring;
  }

  // Widget state mirrors the server's clamps so the UI can never request a
  // value the service would reject differently than shown.
  setMotorSpeed(radps: number): CommandPayload {
    const m = this.geometry.limits.max_motor_speed_radps;
    this.widget = { ...this.widget, motor_speed_radps: clamp(radps, -m, m) };
    return this.command();
  }

  setPressure1(kPa: number): CommandPayload {
    this.widget = { ...this.widget, p1_kPa: clamp(kPa, 0, this.geometry.limits.max_pressure_kPa) };
    return this.command();
  }

  setPressure2(kPa: number): CommandPayload {
    this.widget = { ...this.widget, p2_kPa: clamp(kPa, 0, this.geometry.limits.max_pressure_kPa) };
    return this.command();
  }

  setPause(pause: boolean): CommandPayload {
    this.widget = { ...this.widget, pause };
    return this.command();
  }

  command(): CommandPayload {
    return { ...this.widget };
  }
}
