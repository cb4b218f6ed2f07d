// Socket plumbing. SocketLike is the structural slice of the WHATWG WebSocket
// API the console needs, satisfied by both the browser's WebSocket and the
// "ws" package used in tests.

import { parseCommandReply, parseServerFrame } from "./protocol.js";
import type { CommandPayload, CommandReply } from "./protocol.js";
import type { ConsoleViewModel } from "./viewmodel.js";

export interface MessageEventLike {
  data?: unknown;
}

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "message" | "close" | "error", listener: (event: MessageEventLike) => void): void;
}

// Feeds server frames into the view model. A frame the parser refuses (wrong
// proto_version, malformed) kills the channel rather than rendering garbage.
export function attachStateChannel(socket: SocketLike, vm: ConsoleViewModel, onFrame?: () => void): void {
  socket.addEventListener("message", (event) => {
    try {
      vm.ingest(parseServerFrame(String(event.data)));
    } catch (err) {
      vm.markClosed(err instanceof Error ? err.message : String(err));
      socket.close();
      return;
    }
    if (onFrame) onFrame();
  });
  socket.addEventListener("close", () => vm.markClosed());
  socket.addEventListener("error", () => vm.markClosed("connection error"));
}

export interface Scheduler {
  set(callback: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const defaultScheduler: Scheduler = {
  set: (callback, ms) => setTimeout(callback, ms),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export interface CommandChannelOptions {
  debounceMs?: number;
  scheduler?: Scheduler;
}

export const COMMAND_DEBOUNCE_MS = 50;

// Trailing-edge debounce, latest wins: a slider drag emits a burst of
// requests but the service sees at most one command per window, carrying the
// newest values.
export class CommandChannel {
  onReply: ((reply: CommandReply) => void) | null = null;
  onSend: ((command: CommandPayload) => void) | null = null;
  sentCount = 0;

  private pending: CommandPayload | null = null;
  private timer: unknown = null;
  private readonly debounceMs: number;
  private readonly scheduler: Scheduler;

  constructor(
    private readonly socket: SocketLike,
    options: CommandChannelOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? COMMAND_DEBOUNCE_MS;
    this.scheduler = options.scheduler ?? defaultScheduler;
    socket.addEventListener("message", (event) => {
      let reply: CommandReply;
      try {
        reply = parseCommandReply(String(event.data));
      } catch {
        return;
      }
      if (this.onReply) this.onReply(reply);
    });
  }

  request(command: CommandPayload): void {
    this.pending = command;
    if (this.timer === null) {
      this.timer = this.scheduler.set(() => this.flush(), this.debounceMs);
    }
  }

  dispose(): void {
    if (this.timer !== null) {
      this.scheduler.clear(this.timer);
      this.timer = null;
    }
    this.pending = null;
  }

  private flush(): void {
    this.timer = null;
    if (this.pending === null) return;
    const command = this.pending;
    this.pending = null;
    if (this.onSend) this.onSend(command);
    this.socket.send(JSON.stringify(command));
    this.sentCount += 1;
  }
}
