/**
 * Wire types and canonical encoding for session logs.
 *
 * The encoding must match the server's canonical document byte for byte:
 * compact separators, non-ASCII preserved, fixed key order, and optional
 * fields absent rather than null.
 */

export type EventKind =
  | "Start"
  | "End"
  | "Insertion"
  | "Deletion"
  | "Focus"
  | "Unfocus"
  | "Copy"
  | "Paste";

export interface WireEvent {
  type: EventKind;
  time: number;
  text?: string;
  /** Full content of the affected line, not a line number. */
  line?: string;
}

export interface WireSessionLog {
  session_id: string;
  user_id: string;
  file_path: string;
  client_version: string;
  events: WireEvent[];
}

// Kinds that carry a text payload on the wire.
export const TEXT_KINDS: ReadonlySet<EventKind> = new Set([
  "Insertion",
  "Deletion",
  "Copy",
  "Paste",
]);

// Kinds that carry a line number on the wire.
export const LINE_KINDS: ReadonlySet<EventKind> = new Set([
  "Insertion",
  "Deletion",
]);

/** Minimum atomic insertion size that is worth emitting. */
export const MIN_INSERTION_CHARS = 4;

function encodeEvent(event: WireEvent): Record<string, unknown> {
  const out: Record<string, unknown> = { type: event.type, time: event.time };
  if (event.text !== undefined) {
    out.text = event.text;
  }
  if (event.line !== undefined) {
    out.line = event.line;
  }
  return out;
}

/** Serialize a log to the canonical JSON document accepted by POST /logs. */
export function encodeLog(log: WireSessionLog): string {
  return JSON.stringify({
    session_id: log.session_id,
    user_id: log.user_id,
    file_path: log.file_path,
    client_version: log.client_version,
    events: log.events.map(encodeEvent),
  });
}
