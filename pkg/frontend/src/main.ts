// Browser entry point. Wires the view model, sockets, and sliders to the two
// SVG panels. All rendering happens in one requestAnimationFrame loop; socket
// callbacks only mutate the view model and set a dirty flag, so network
// events never touch the DOM off the rendering context.

import { parseGeometry } from "./protocol.js";
import type { CommandReply, Geometry } from "./protocol.js";
import { ConsoleViewModel } from "./viewmodel.js";
import { crossSectionView, renderCrossSection } from "./render_cross_section.js";
import { progressView, renderProgress } from "./render_progress.js";
import { attachStateChannel, CommandChannel } from "./client.js";
import type { SocketLike } from "./client.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function wsUrl(path: string): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}${path}`;
}

function describeReply(reply: CommandReply): string {
  if (!reply.accepted) return `rejected: ${reply.reason}`;
  const clamps = Object.entries(reply.clamped);
  if (clamps.length === 0) return "applied";
  return clamps
    .map(([field, c]) => `${field} clamped ${c.requested.toFixed(2)} → ${c.applied.toFixed(2)}`)
    .join(", ");
}

function setupSliders(vm: ConsoleViewModel, channel: CommandChannel, geometry: Geometry): void {
  const p1 = byId<HTMLInputElement>("p1");
  const p2 = byId<HTMLInputElement>("p2");
  const motor = byId<HTMLInputElement>("motor");
  const pause = byId<HTMLButtonElement>("pause");

  const maxP = geometry.limits.max_pressure_kPa;
  const maxM = geometry.limits.max_motor_speed_radps;
  for (const slider of [p1, p2]) {
    slider.min = "0";
    slider.max = String(maxP);
    slider.step = "0.25";
    slider.value = "0";
  }
  motor.min = String(-maxM);
  motor.max = String(maxM);
  motor.step = String(maxM / 100);
  motor.value = "0";

  const p1Out = byId<HTMLElement>("p1-value");
  const p2Out = byId<HTMLElement>("p2-value");
  const motorOut = byId<HTMLElement>("motor-value");

  const push = (): void => channel.request(vm.command());
  p1.addEventListener("input", () => {
    const c = vm.setPressure1(Number(p1.value));
    p1Out.textContent = `${c.p1_kPa.toFixed(2)} kPa`;
    push();
  });
  p2.addEventListener("input", () => {
    const c = vm.setPressure2(Number(p2.value));
    p2Out.textContent = `${c.p2_kPa.toFixed(2)} kPa`;
    push();
  });
  motor.addEventListener("input", () => {
    const c = vm.setMotorSpeed(Number(motor.value));
    motorOut.textContent = `${c.motor_speed_radps.toFixed(0)} rad/s`;
    push();
  });
  pause.addEventListener("click", () => {
    const next = !vm.command().pause;
    vm.setPause(next);
    pause.textContent = next ? "resume" : "pause";
    pause.classList.toggle("engaged", next);
    push();
  });
}

async function boot(): Promise<void> {
  const response = await fetch("/geometry");
  if (!response.ok) throw new Error(`geometry fetch failed: HTTP ${response.status}`);
  const geometry = parseGeometry(await response.json());

  const vm = new ConsoleViewModel(geometry);
  byId<HTMLElement>("scenario").textContent =
    `${geometry.scenario} · ${geometry.lumen_length_mm.toFixed(0)} mm` +
    `${geometry.collapsed ? " · collapsed" : ""}`;

  const stateSocket = new WebSocket(wsUrl("/ws/state")) as unknown as SocketLike;
  const commandSocket = new WebSocket(wsUrl("/ws/command")) as unknown as SocketLike;
  const channel = new CommandChannel(commandSocket);

  const replyOut = byId<HTMLElement>("last-reply");
  channel.onReply = (reply) => {
    replyOut.textContent = describeReply(reply);
    replyOut.classList.toggle("rejected", !reply.accepted);
  };

  let dirty = true;
  attachStateChannel(stateSocket, vm, () => {
    dirty = true;
  });
  setupSliders(vm, channel, geometry);

  const statusPill = byId<HTMLElement>("status");
  const crossPanel = byId<HTMLElement>("cross-section");
  const progressPanel = byId<HTMLElement>("progress");
  let lastStatus = "";
  let lastRenderMs = 0;

  const tick = (nowMs: number): void => {
    const status = vm.status();
    // Re-render on new frames, on status changes, and at a slow heartbeat so
    // the stale badge shows up even when no frames arrive at all.
    if (dirty || status !== lastStatus || nowMs - lastRenderMs > 250) {
      dirty = false;
      lastStatus = status;
      lastRenderMs = nowMs;
      statusPill.textContent = vm.endedReason !== null ? `closed: ${vm.endedReason}` : status;
      statusPill.dataset["status"] = status;
      if (vm.latest !== null) {
        crossPanel.innerHTML = renderCrossSection(crossSectionView(vm.latest, vm.stale()));
        progressPanel.innerHTML = renderProgress(progressView(geometry, vm.history(), vm.latest), geometry);
      }
    }
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
}

boot().catch((err: unknown) => {
  document.body.innerHTML = `<p class="boot-error">console failed to start: ${String(err)}</p>`;
});
