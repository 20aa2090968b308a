"use strict";
/**
 * Per-file event buffering for the capture extension.
 *
 * The manager owns at most one active buffer at a time. Every buffer opens
 * with Start; switching or closing the active file appends End and hands the
 * finished log to a sink for transmission. Handlers never throw into the
 * editor: every entry point swallows its own failures and reports them
 * through the diagnostic callback.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.CaptureManager = exports.CaptureBuffer = exports.DEFAULT_IDLE_FLUSH_MS = void 0;
const crypto_1 = require("crypto");
const events_1 = require("./events");
exports.DEFAULT_IDLE_FLUSH_MS = 2000;
class CaptureBuffer {
    constructor(filePath, sessionId, startTime) {
        this.events = [];
        // keystroke fragments awaiting the idle discard; never emitted as events
        this.accumulator = [];
        this.filePath = filePath;
        this.sessionId = sessionId;
        this.events.push({ type: "Start", time: startTime });
    }
}
exports.CaptureBuffer = CaptureBuffer;
class CaptureManager {
    constructor(sink, options) {
        this.active = null;
        this.sink = sink;
        this.userId = options.userId;
        this.clientVersion = options.clientVersion;
        this.clock = options.clock ?? Date.now;
        this.sessionIds = options.sessionIds ?? crypto_1.randomUUID;
        this.idleFlushMs = options.idleFlushMs ?? exports.DEFAULT_IDLE_FLUSH_MS;
        this.diagnostic = options.onDiagnostic ?? (() => undefined);
    }
    get activeBuffer() {
        return this.active;
    }
    /** File became the active editor: close the old session, open a new one. */
    openFile(filePath) {
        this.guard(() => {
            if (this.active !== null && this.active.filePath === filePath) {
                return;
            }
            this.closeActive();
            this.active = new CaptureBuffer(filePath, this.sessionIds(), this.clock());
        });
    }
    /** The active editor was closed or replaced; flush its session. */
    closeFile() {
        this.guard(() => this.closeActive());
    }
    /**
     * One atomic document change. Single characters feed the accumulator and
     * are discarded after idle; atomic insertions of at least 4 characters
     * become Insertion events carrying the inserted text plus the full line
     * content; any removal becomes a Deletion.
     */
    onDocumentChange(inserted, removed, lineText) {
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
            if (inserted.length >= events_1.MIN_INSERTION_CHARS) {
                buffer.events.push({
                    type: "Insertion",
                    time: now,
                    text: inserted,
                    line: lineText,
                });
            }
            else if (inserted.length > 0) {
                buffer.accumulator.push({ text: inserted, time: now });
            }
        });
    }
    /** In-editor copy or paste command. */
    onClipboardCommand(kind, clipboardText) {
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
            const type = kind === "copy" ? "Copy" : "Paste";
            buffer.events.push({ type, time: this.clock(), text: clipboardText });
        });
    }
    /** Whole-window focus transition. */
    onWindowFocus(focused) {
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
    shutdown() {
        this.guard(() => this.closeActive());
    }
    closeActive() {
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
    expireAccumulator(buffer, now) {
        const last = buffer.accumulator[buffer.accumulator.length - 1];
        if (last !== undefined && now - last.time > this.idleFlushMs) {
            buffer.accumulator = [];
        }
    }
    guard(body) {
        try {
            body();
        }
        catch (error) {
            this.diagnostic(`capture handler failed: ${String(error)}`);
        }
    }
}
exports.CaptureManager = CaptureManager;
//# sourceMappingURL=capture.js.map