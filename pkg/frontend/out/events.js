"use strict";
/**
 * Wire types and canonical encoding for session logs.
 *
 * The encoding must match the server's canonical document byte for byte:
 * compact separators, non-ASCII preserved, fixed key order, and optional
 * fields absent rather than null.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.MIN_INSERTION_CHARS = exports.LINE_KINDS = exports.TEXT_KINDS = void 0;
exports.encodeLog = encodeLog;
// Kinds that carry a text payload on the wire.
exports.TEXT_KINDS = new Set([
    "Insertion",
    "Deletion",
    "Copy",
    "Paste",
]);
// Kinds that carry a line number on the wire.
exports.LINE_KINDS = new Set([
    "Insertion",
    "Deletion",
]);
/** Minimum atomic insertion size that is worth emitting. */
exports.MIN_INSERTION_CHARS = 4;
function encodeEvent(event) {
    const out = { type: event.type, time: event.time };
    if (event.text !== undefined) {
        out.text = event.text;
    }
    if (event.line !== undefined) {
        out.line = event.line;
    }
    return out;
}
/** Serialize a log to the canonical JSON document accepted by POST /logs. */
function encodeLog(log) {
    return JSON.stringify({
        session_id: log.session_id,
        user_id: log.user_id,
        file_path: log.file_path,
        client_version: log.client_version,
        events: log.events.map(encodeEvent),
    });
}
//# sourceMappingURL=events.js.map