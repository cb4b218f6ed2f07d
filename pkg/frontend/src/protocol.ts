// Wire types for the teleoperation service. The console speaks exactly this
// protocol and refuses frames from any other proto_version: rendering a frame
// whose fields we misread is worse than showing a dead connection.

export const PROTO_VERSION = 1;

export interface StateFrame {
  type: "state";
  proto_version: number;
  seq: number;
  time_s: number;
  s_mm: number;
  v_mmps: number;
  tilt_deg: number;
  p1_kPa: number;
  p2_kPa: number;
  tracks_in_contact: number;
  per_track_normal_N: number[];
  available_traction_N: number;
  traction_margin_N: number;
  stalled: boolean;
  camera_offset_mm: number;
  paused: boolean;
  lumen_radius_mm: number;
  lumen_length_mm: number;
  theoretical_speed_mmps: number;
}

export interface EndFrame {
  type: "end";
  proto_version: number;
  reason: string;
}

export type ServerFrame = StateFrame | EndFrame;

export interface CommandPayload {
  motor_speed_radps: number;
  p1_kPa: number;
  p2_kPa: number;
  pause: boolean;
}

export interface ClampEntry {
  requested: number;
  applied: number;
}

export interface CommandAck {
  type: "ack";
  proto_version: number;
  accepted: true;
  clamped: Record<string, ClampEntry>;
  applied: CommandPayload;
}

export interface CommandError {
  type: "error";
  proto_version: number;
  accepted: false;
  reason: string;
}

export type CommandReply = CommandAck | CommandError;

export interface GeometrySegment {
  s0_mm: number;
  s1_mm: number;
  kind: "straight" | "elbow";
  radius_mm: number;
}

export interface CommandLimits {
  max_motor_speed_radps: number;
  max_pressure_kPa: number;
}

export interface Geometry {
  type: "geometry";
  proto_version: number;
  scenario: string;
  lumen_length_mm: number;
  collapsed: boolean;
  segments: GeometrySegment[];
  elbows_mm: [number, number][];
  supports_mm: number[];
  limits: CommandLimits;
  theoretical_speed_mmps: number;
  rate_hz: number;
}

export class ProtocolError extends Error {}

function checkVersion(data: Record<string, unknown>): void {
  if (data["proto_version"] !== PROTO_VERSION) {
    throw new ProtocolError(
      `unsupported proto_version ${String(data["proto_version"])}, console speaks ${PROTO_VERSION}`,
    );
  }
}

function asObject(raw: unknown): Record<string, unknown> {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("frame is not a JSON object");
  }
  return raw as Record<string, unknown>;
}

const STATE_NUMBER_FIELDS = [
  "seq",
  "time_s",
  "s_mm",
  "v_mmps",
  "tilt_deg",
  "p1_kPa",
  "p2_kPa",
  "tracks_in_contact",
  "available_traction_N",
  "traction_margin_N",
  "camera_offset_mm",
  "lumen_radius_mm",
  "lumen_length_mm",
  "theoretical_speed_mmps",
] as const;

export function parseServerFrame(text: string): ServerFrame {
  const data = asObject(JSON.parse(text));
  checkVersion(data);
  if (data["type"] === "end") {
    if (typeof data["reason"] !== "string") throw new ProtocolError("end frame missing reason");
    return data as unknown as EndFrame;
  }
  if (data["type"] !== "state") {
    throw new ProtocolError(`unknown frame type ${String(data["type"])}`);
  }
  for (const field of STATE_NUMBER_FIELDS) {
    if (typeof data[field] !== "number") throw new ProtocolError(`state frame field ${field} is not a number`);
  }
  for (const field of ["stalled", "paused"]) {
    if (typeof data[field] !== "boolean") throw new ProtocolError(`state frame field ${field} is not a boolean`);
  }
  const normals = data["per_track_normal_N"];
  if (!Array.isArray(normals) || normals.some((n) => typeof n !== "number")) {
    throw new ProtocolError("state frame field per_track_normal_N is not a number array");
  }
  return data as unknown as StateFrame;
}

export function parseCommandReply(text: string): CommandReply {
  const data = asObject(JSON.parse(text));
  checkVersion(data);
  if (data["type"] === "ack" && data["accepted"] === true) return data as unknown as CommandAck;
  if (data["type"] === "error" && data["accepted"] === false) return data as unknown as CommandError;
  throw new ProtocolError(`unknown command reply type ${String(data["type"])}`);
}

export function parseGeometry(raw: unknown): Geometry {
  const data = asObject(raw);
  checkVersion(data);
  if (data["type"] !== "geometry") {
    throw new ProtocolError(`expected geometry, got ${String(data["type"])}`);
  }
  if (!Array.isArray(data["segments"]) || !Array.isArray(data["elbows_mm"]) || !Array.isArray(data["supports_mm"])) {
    throw new ProtocolError("geometry frame missing layout arrays");
  }
  const limits = asObject(data["limits"]);
  for (const field of ["max_motor_speed_radps", "max_pressure_kPa"]) {
    if (typeof limits[field] !== "number") throw new ProtocolError(`geometry limits field ${field} is not a number`);
  }
  return data as unknown as Geometry;
}
