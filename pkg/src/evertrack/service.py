"""Live teleoperation backend: real-time stepping, state streaming,
operator commands with server-side limits.

One asyncio stepping loop owns the robot state.  Each tick advances the
simulation by exactly one frame period (so simulated time tracks wall
time), applies the most recent operator command at the step boundary,
and broadcasts one JSON state frame to every connected state client.
Slow clients never build a backlog: each client holds a one-slot queue
where a fresh frame replaces an unread stale one.  Commands arrive on a
separate channel and are acknowledged one reply per message, with any
server-side clamping spelled out in the ack.

Frames are JSON text with a `proto_version` field; the schemas live in
docs/wire_protocol.md and are pinned by the golden files under
docs/golden/.  Closing the service writes the accumulated run trace to
the output directory, same format as a batch run.

The physical analog is the bench rig: one motor speed knob and two
pressure regulators; latest knob position wins, there is no command
queueing.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import __version__
from .contact import tilt_angle, traction
from .lumen import Elbow
from .navigation import (
    Command,
    RobotState,
    SimTrace,
    TraceRow,
    resolve_contact,
    summarize,
)
from .scenario import ScenarioSpec, load_scenario

PROTO_VERSION = 1
DEFAULT_RATE_HZ = 20.0

_FORWARD = 1.0


class TeleopSession:
    """Single-writer simulation session behind the wire endpoints.

    All mutation happens on the event loop: the stepper task writes
    state, command handlers only swap the pending-command slot.  Reads
    from request handlers therefore never see a half-applied command.
    """

    def __init__(self, spec: ScenarioSpec, rate_hz: float = DEFAULT_RATE_HZ,
                 out_dir: Path | None = None):
        if rate_hz <= 0:
            raise ValueError(f"rate_hz must be positive, got {rate_hz}")
        self.spec = spec
        self.rate_hz = rate_hz
        self.out_dir = out_dir
        self.robot = spec.build_robot()
        self.lumen = spec.lumen
        self.config = replace(spec.sim, dt_s=1.0 / rate_hz)
        self.max_pressure_kPa = spec.calibration.max_pressure_kPa

        first = spec.schedule[0].command
        self.command = Command(
            motor_speed_radps=0.0,  # parked until the operator drives
            p1_kPa=first.p1_kPa,
            p2_kPa=first.p2_kPa,
        )
        self.paused = False
        self._pending: tuple[Command, bool] | None = None

        self.state = RobotState(
            s_mm=spec.s0_mm,
            v_mmps=0.0,
            tilt_deg=0.0,
            pressures_kPa=(first.p1_kPa, first.p2_kPa),
            motor_speed_radps=0.0,
            stalled=False,
        )
        self.seq = 0
        self.sim_time_s = 0.0
        self.rows: list[TraceRow] = []
        self._clients: set[asyncio.Queue] = set()
        self._stop = asyncio.Event()
        self._task: asyncio.Task | None = None
        self._flushed = False

    # -- command path ---------------------------------------------------------

    def apply_command(self, payload) -> dict:
        """Validate, clamp, and stage one operator command frame.

        Returns the acknowledgment document.  Malformed frames raise
        ValueError and leave the loop untouched.
        """
        if not isinstance(payload, dict):
            raise ValueError("command frame must be a JSON object")
        required = {"motor_speed_radps", "p1_kPa", "p2_kPa", "pause"}
        missing = sorted(required - payload.keys())
        if missing:
            raise ValueError(f"command frame missing fields: {', '.join(missing)}")
        unknown = sorted(set(payload) - required - {"proto_version", "type"})
        if unknown:
            raise ValueError(f"command frame has unknown fields: {', '.join(unknown)}")
        values = {}
        for key in ("motor_speed_radps", "p1_kPa", "p2_kPa"):
            raw = payload[key]
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise ValueError(f"{key} must be a number, got {raw!r}")
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError(f"{key} must be finite")
            values[key] = v
        pause = payload["pause"]
        if not isinstance(pause, bool):
            raise ValueError(f"pause must be true or false, got {pause!r}")

        clamped = {}
        limit = self.robot.max_motor_speed_radps
        motor = values["motor_speed_radps"]
        applied_motor = min(max(motor, -limit), limit)
        if applied_motor != motor:
            clamped["motor_speed_radps"] = {"requested": motor,
                                            "applied": applied_motor}
        pressures = []
        for key in ("p1_kPa", "p2_kPa"):
            p = values[key]
            applied = min(max(p, 0.0), self.max_pressure_kPa)
            if applied != p:
                clamped[key] = {"requested": p, "applied": applied}
            pressures.append(applied)

        command = Command(applied_motor, pressures[0], pressures[1])
        self._pending = (command, pause)
        return {
            "type": "ack",
            "proto_version": PROTO_VERSION,
            "accepted": True,
            "clamped": clamped,
            "applied": {
                "motor_speed_radps": applied_motor,
                "p1_kPa": pressures[0],
                "p2_kPa": pressures[1],
                "pause": pause,
            },
        }

    # -- stepping loop --------------------------------------------------------

    def start(self) -> None:
        if self._task is None:
            # warm the membrane cache at the initial pressures so the first
            # ticks do not spend whole frame periods inside a cold solve
            resolve_contact(self.robot, self.lumen, self.state.s_mm,
                            self.state.pressures_kPa, self.config.gravity)
            self._task = asyncio.get_running_loop().create_task(self._run_loop())

    async def stop(self) -> None:
        self._stop.set()
        if self._task is not None:
            await self._task
            self._task = None
        self._broadcast({"type": "end", "proto_version": PROTO_VERSION,
                         "reason": "service stopped"})
        self.flush_trace()

    async def _run_loop(self) -> None:
        period = 1.0 / self.rate_hz
        deadline = time.monotonic() + period
        while not self._stop.is_set():
            self._tick()
            self._broadcast(self._state_frame())
            # absolute deadlines: a slow tick is repaid by short sleeps,
            # keeping simulated time within drift tolerance of wall time
            now = time.monotonic()
            if deadline > now:
                try:
                    await asyncio.wait_for(self._stop.wait(), deadline - now)
                except asyncio.TimeoutError:
                    pass
            deadline += period

    def _tick(self) -> None:
        if self._pending is not None:
            self.command, self.paused = self._pending
            self._pending = None
        if self.paused:
            return
        state, row = _step(self)
        self.sim_time_s += self.config.dt_s
        self.state = state
        if row is not None:
            self.rows.append(replace(row, time_s=self.sim_time_s))

    # -- frames ---------------------------------------------------------------

    def _state_frame(self) -> dict:
        self.seq += 1
        pressures = self.state.pressures_kPa
        contact = resolve_contact(self.robot, self.lumen, self.state.s_mm,
                                  pressures, self.config.gravity)
        pull = traction(contact, self.robot.tracks, self.robot.forces)
        nose = tilt_angle(pressures, self.lumen.local_radius(self.state.s_mm),
                          self.robot.geometry, self.robot.chamber,
                          gravity=self.config.gravity)
        return {
            "type": "state",
            "proto_version": PROTO_VERSION,
            "seq": self.seq,
            "time_s": round(self.sim_time_s, 6),
            "s_mm": round(self.state.s_mm, 6),
            "v_mmps": round(self.state.v_mmps, 6),
            "tilt_deg": round(contact.tilt_deg, 6),
            "p1_kPa": pressures[0],
            "p2_kPa": pressures[1],
            "tracks_in_contact": contact.tracks_in_contact,
            "per_track_normal_N": [round(n, 6) for n in contact.per_track_normal_N],
            "available_traction_N": round(pull.available_traction_N, 6),
            "traction_margin_N": round(pull.margin_N, 6),
            "stalled": self.state.stalled,
            "camera_offset_mm": round(nose.nose_offset_mm, 6),
            "paused": self.paused,
            "lumen_radius_mm": round(self.lumen.local_radius(self.state.s_mm), 6),
            "lumen_length_mm": round(self.lumen.total_length_mm, 6),
            "theoretical_speed_mmps": round(
                self.robot.track_speed_mmps(self.robot.max_motor_speed_radps), 6),
        }

    def geometry_frame(self) -> dict:
        """Static session facts a console fetches once at connect time.

        Everything a dashboard needs that never changes mid-session:
        the centerline layout for the side view, and the server-side
        command limits so widget ranges mirror the clamps exactly.
        """
        segments = []
        elbows = []
        acc = 0.0
        for seg in self.lumen.segments:
            start, end = acc, acc + seg.length_mm
            kind = "elbow" if isinstance(seg.kind, Elbow) else "straight"
            segments.append({
                "s0_mm": round(start, 6),
                "s1_mm": round(end, 6),
                "kind": kind,
                "radius_mm": round(seg.diameter_mm / 2.0, 6),
            })
            if kind == "elbow":
                elbows.append([round(start, 6), round(end, 6)])
            acc = end
        return {
            "type": "geometry",
            "proto_version": PROTO_VERSION,
            "scenario": self.spec.name,
            "lumen_length_mm": round(self.lumen.total_length_mm, 6),
            "collapsed": self.lumen.collapsed,
            "segments": segments,
            "elbows_mm": elbows,
            "supports_mm": [round(s, 6) for s in self.lumen.supports],
            "limits": {
                "max_motor_speed_radps": round(
                    self.robot.max_motor_speed_radps, 6),
                "max_pressure_kPa": round(self.max_pressure_kPa, 6),
            },
            "theoretical_speed_mmps": round(
                self.robot.track_speed_mmps(self.robot.max_motor_speed_radps), 6),
            "rate_hz": self.rate_hz,
        }

    def _broadcast(self, frame: dict) -> None:
        for queue in self._clients:
            if queue.full():  # latest wins; the stale frame is droppable
                queue.get_nowait()
            queue.put_nowait(frame)

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue(maxsize=1)
        self._clients.add(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        self._clients.discard(queue)

    # -- shutdown -------------------------------------------------------------

    def flush_trace(self) -> SimTrace:
        """Write the accumulated trace to disk; idempotent."""
        trace = SimTrace(
            rows=tuple(self.rows),
            summary=summarize(tuple(self.rows), completed=False,
                              termination="service_stop"),
        )
        if self.out_dir is not None and not self._flushed:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            stem = f"{self.spec.name}_teleop"
            (self.out_dir / f"{stem}_trace.csv").write_text(trace.to_csv())
            (self.out_dir / f"{stem}_summary.json").write_text(
                json.dumps(trace.summary, indent=2) + "\n"
            )
            self._flushed = True
        return trace


def _step(session: TeleopSession):
    from .navigation import step

    return step(session.state, session.command, session.lumen, session.robot,
                session.config, s_start_mm=session.spec.s0_mm)


def build_app(spec: ScenarioSpec, rate_hz: float = DEFAULT_RATE_HZ,
              out_dir: Path | None = None,
              static_dir: Path | None = None) -> FastAPI:
    """Wire one teleoperation session into a FastAPI application.

    static_dir, when given, is served at the root (the operator console's
    built assets); API routes are registered first and keep precedence.
    """

    session = TeleopSession(spec, rate_hz=rate_hz, out_dir=out_dir)

    async def lifespan(app: FastAPI):
        session.start()
        yield
        await session.stop()

    app = FastAPI(title="evertrack teleoperation", lifespan=lifespan)
    app.state.session = session

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "proto_version": PROTO_VERSION,
            "version": __version__,
            "scenario": spec.name,
            "rate_hz": session.rate_hz,
        }

    @app.get("/geometry")
    def geometry():
        return session.geometry_frame()

    @app.websocket("/ws/state")
    async def ws_state(websocket: WebSocket):
        await websocket.accept()
        queue = session.subscribe()
        try:
            while True:
                frame = await queue.get()
                await websocket.send_text(json.dumps(frame))
                if frame.get("type") == "end":
                    break
        except WebSocketDisconnect:
            pass
        finally:
            session.unsubscribe(queue)

    @app.websocket("/ws/command")
    async def ws_command(websocket: WebSocket):
        await websocket.accept()
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    payload = json.loads(text)
                except json.JSONDecodeError as exc:
                    reply = {"type": "error", "proto_version": PROTO_VERSION,
                             "accepted": False,
                             "reason": f"not valid JSON: {exc}"}
                else:
                    try:
                        reply = session.apply_command(payload)
                    except ValueError as exc:
                        reply = {"type": "error",
                                 "proto_version": PROTO_VERSION,
                                 "accepted": False, "reason": str(exc)}
                await websocket.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass

    if static_dir is not None:
        # mounted last so /health, /geometry and /ws/* keep precedence
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="console")

    return app


def serve(spec_or_name: ScenarioSpec | str, *, host: str = "127.0.0.1",
          port: int = 8765, rate_hz: float = DEFAULT_RATE_HZ,
          out_dir: Path | None = None, static_dir: Path | None = None) -> int:
    """Run the teleoperation service until interrupted."""
    import uvicorn

    spec = (spec_or_name if isinstance(spec_or_name, ScenarioSpec)
            else load_scenario(spec_or_name))
    app = build_app(spec, rate_hz=rate_hz, out_dir=out_dir,
                    static_dir=static_dir)
    print(f"serving scenario '{spec.name}' on ws://{host}:{port}/ws/state "
          f"at {rate_hz:g} Hz"
          + (f", console from {static_dir}" if static_dir else ""))
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0
