/**
 * Per-file event buffering for the capture extension.
 *
 * The manager owns at most one active buffer at a time. Every buffer opens
 * with Start; switching or closing the active file appends End and hands the
 * finished log to a sink for transmission. Handlers never throw into the
 * editor: every entry point swallows its own failures and reports them
 * through the diagnostic callback.
 */

import { randomUUID } from "crypto";
import {
  EventKind,
  MIN_INSERTION_CHARS,
  WireEvent,
  WireSessionLog,
} from "./events";

export type Clock = () => number;

export type LogSink = (log: WireSessionLog) => void;

export type Diagnostic = (message: string) => void;

export interface CaptureOptions {
  userId: string;
  clientVersion: string;
  clock?: Clock;
  sessionIds?: () => string;
  /** Typing inactivity after which the small-edit accumulator is discarded. */
  idleFlushMs?: number;
  onDiagnostic?: Diagnostic;
}

interface AccumulatorEntry {
  text: string;
  time: number;
}

export const DEFAULT_IDLE_FLUSH_MS = 2000;

export class CaptureBuffer {
  readonly filePath: string;
  readonly sessionId: string;
  readonly events: WireEvent[] = [];
  // keystroke fragments awaiting the idle discard; never emitted as events
  accumulator: AccumulatorEntry[] = [];

  constructor(filePath: string, sessionId: string, startTime: number) {
    this.filePath = filePath;
    this.sessionId = sessionId;
    this.events.push({ type: "Start", time: startTime });
  }
}

export class CaptureManager {
  private readonly userId: string;
  private readonly clientVersion: string;
  private readonly clock: Clock;
  private readonly sessionIds: () => string;
  private readonly idleFlushMs: number;
  private readonly sink: LogSink;
  private readonly diagnostic: Diagnostic;
  private active: CaptureBuffer | null = null;

  constructor(sink: LogSink, options: CaptureOptions) {
    this.sink = sink;
    this.userId = options.userId;
    this.clientVersion = options.clientVersion;
    this.clock = options.clock ?? Date.now;
    this.sessionIds = options.sessionIds ?? randomUUID;
    this.idleFlushMs = options.idleFlushMs ?? DEFAULT_IDLE_FLUSH_MS;
    this.diagnostic = options.onDiagnostic ?? (() => undefined);
  }

  get activeBuffer(): CaptureBuffer | null {
    return this.active;
  }

  /** File became the active editor: close the old session, open a new one. */
  openFile(filePath: string): void {
    this.guard(() => {
      if (this.active !== null && this.active.filePath === filePath) {
        return;
      }
      this.closeActive();
      this.active = new CaptureBuffer(
        filePath,
        this.sessionIds(),
        this.clock(),
      );
    });
  }

  /** The active editor was closed or replaced; flush its session. */
  closeFile(): void {
    this.guard(() => this.closeActive());
  }

  /**
   * One atomic document change. Single characters feed the accumulator and
   * are discarded after idle; atomic insertions of at least 4 characters
   * become Insertion events carrying the inserted text plus the full line
   * content; any removal becomes a Deletion.
   */
  onDocumentChange(inserted: string, removed: string, lineText: string): void {
    this.guard(() => {
      const buffer = this.active;
      if (buffer === null) {
        return;
      }
      const now = this.clock();
      this.expireAccumulator(buffer, now);
      if (removed.length > 0) {
        buffer.events.push({
          type: "Deletion",
          time: now,
          text: removed,
          line: lineText,
        });
      }
      if (inserted.length >= MIN_INSERTION_CHARS) {
        buffer.events.push({
          type: "Insertion",
          time: now,
          text: inserted,
          line: lineText,
        });
      } else if (inserted.length > 0) {
        buffer.accumulator.push({ text: inserted, time: now });
      }
    });
  }

  /** In-editor copy or paste command. */
  onClipboardCommand(kind: "copy" | "paste", clipboardText: string): void {
    this.guard(() => {
      const buffer = this.active;
      if (buffer === null) {
        return;
      }
      if (clipboardText.length === 0) {
        // empty-text events fail server validation; keep them local
        this.diagnostic(`clipboard unreadable during ${kind}; event dropped`);
        return;
      }
      const type: EventKind = kind === "copy" ? "Copy" : "Paste";
      buffer.events.push({ type, time: this.clock(), text: clipboardText });
    });
  }

  /** Whole-window focus transition. */
  onWindowFocus(focused: boolean): void {
    this.guard(() => {
      const buffer = this.active;
      if (buffer === null) {
        return;
      }
      buffer.events.push({
        type: focused ? "Focus" : "Unfocus",
        time: this.clock(),
      });
    });
  }

  /** Flush the active session without opening a new one (e.g. on shutdown). */
  shutdown(): void {
    this.guard(() => this.closeActive());
  }

  private closeActive(): void {
    const buffer = this.active;
    this.active = null;
    if (buffer === null) {
      return;
    }
    buffer.accumulator = [];
    buffer.events.push({ type: "End", time: this.clock() });
    this.sink({
      session_id: buffer.sessionId,
      user_id: this.userId,
      file_path: buffer.filePath,
      client_version: this.clientVersion,
      events: buffer.events,
    });
  }

  private expireAccumulator(buffer: CaptureBuffer, now: number): void {
    const last = buffer.accumulator[buffer.accumulator.length - 1];
    if (last !== undefined && now - last.time > this.idleFlushMs) {
      buffer.accumulator = [];
    }
  }

  private guard(body: () => void): void {
    try {
      body();
    } catch (error) {
      this.diagnostic(`capture handler failed: ${String(error)}`);
    }
  }
}
