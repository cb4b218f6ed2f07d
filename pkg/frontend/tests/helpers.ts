// Test utilities: golden-frame loading and synthetic frame construction.
// Goldens live in docs/golden at the repository root and are shared with the
// service's own tests, so both ends of the wire are pinned to the same bytes.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { Geometry, StateFrame } from "../src/protocol.js";

const GOLDEN_DIR = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "docs", "golden");

export function goldenText(name: string): string {
  return readFileSync(join(GOLDEN_DIR, `${name}.json`), "utf8");
}

export function golden<T>(name: string): T {
  return JSON.parse(goldenText(name)) as T;
}

export function goldenFrame(name: string): StateFrame {
  return golden<StateFrame>(name);
}

export function goldenGeometry(): Geometry {
  return golden<Geometry>("geometry");
}

export function makeFrame(overrides: Partial<StateFrame> = {}): StateFrame {
  return { ...goldenFrame("state_frame"), ...overrides };
}

export async function until(cond: () => boolean, timeoutMs: number, what: string): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) throw new Error(`timed out after ${timeoutMs} ms waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}
