/**
 * Delivery of finished session logs to the ingestion service.
 *
 * Transmission happens off the capture path: the capture manager's sink only
 * enqueues, and network I/O runs afterwards. Logs that cannot be delivered
 * are spooled to disk and retried on the next activation. A log leaves the
 * spool only after the server acknowledges storage; logs the server rejects
 * as invalid are kept for diagnosis and not retried.
 */

import * as fs from "fs";
import * as path from "path";
import { encodeLog, WireSessionLog } from "./events";

export type SendOutcome = "stored" | "spooled" | "rejected" | "unauthorized";

export interface TransportOptions {
  serverUrl: string;
  token: string;
  spoolDir: string;
  /** Test seam; defaults to global fetch. */
  fetchImpl?: typeof fetch;
  onDiagnostic?: (message: string) => void;
}

const REJECTED_SUFFIX = ".rejected.json";
const PENDING_SUFFIX = ".pending.json";

export class Transport {
  private readonly serverUrl: string;
  private token: string;
  private readonly spoolDir: string;
  private readonly fetchImpl: typeof fetch;
  private readonly diagnostic: (message: string) => void;

  constructor(options: TransportOptions) {
    this.serverUrl = options.serverUrl.replace(/\/+$/, "");
    this.token = options.token;
    this.spoolDir = options.spoolDir;
    this.fetchImpl = options.fetchImpl ?? fetch;
    this.diagnostic = options.onDiagnostic ?? (() => undefined);
  }

  setToken(token: string): void {
    this.token = token;
  }

  /** Deliver one log, spooling it if the service is unreachable. */
  async send(log: WireSessionLog): Promise<SendOutcome> {
    const document = encodeLog(log);
    const outcome = await this.post(document);
    if (outcome === "spooled") {
      this.writeSpool(log.session_id + PENDING_SUFFIX, document);
    } else if (outcome === "rejected") {
      this.writeSpool(log.session_id + REJECTED_SUFFIX, document);
      this.diagnostic(`server rejected session ${log.session_id}; kept in spool`);
    } else if (outcome === "unauthorized") {
      this.writeSpool(log.session_id + PENDING_SUFFIX, document);
      this.diagnostic("authentication failed; re-login required, log retained");
    }
    return outcome;
  }

  /** Retry spooled logs; each file is deleted only once the server stores it. */
  async retryPending(): Promise<number> {
    let delivered = 0;
    for (const name of this.pendingFiles()) {
      const file = path.join(this.spoolDir, name);
      const outcome = await this.post(fs.readFileSync(file, "utf-8"));
      if (outcome === "stored") {
        fs.unlinkSync(file);
        delivered += 1;
      } else if (outcome === "rejected") {
        fs.renameSync(
          file,
          file.slice(0, -PENDING_SUFFIX.length) + REJECTED_SUFFIX,
        );
      }
    }
    return delivered;
  }

  pendingCount(): number {
    return this.pendingFiles().length;
  }

  /** Drop everything awaiting transmission (user-initiated purge). */
  purgeSpool(): void {
    if (!fs.existsSync(this.spoolDir)) {
      return;
    }
    for (const name of fs.readdirSync(this.spoolDir)) {
      if (name.endsWith(PENDING_SUFFIX) || name.endsWith(REJECTED_SUFFIX)) {
        fs.unlinkSync(path.join(this.spoolDir, name));
      }
    }
  }

  private pendingFiles(): string[] {
    if (!fs.existsSync(this.spoolDir)) {
      return [];
    }
    return fs
      .readdirSync(this.spoolDir)
      .filter((name) => name.endsWith(PENDING_SUFFIX))
      .sort();
  }

  private writeSpool(name: string, document: string): void {
    fs.mkdirSync(this.spoolDir, { recursive: true });
    fs.writeFileSync(path.join(this.spoolDir, name), document, "utf-8");
  }

  private async post(document: string): Promise<SendOutcome> {
    try {
      const response = await this.fetchImpl(`${this.serverUrl}/logs`, {
        method: "POST",
        headers: {
          "content-type": "application/json",
          authorization: `Bearer ${this.token}`,
        },
        body: document,
      });
      if (response.status === 201) {
        return "stored";
      }
      if (response.status === 401 || response.status === 403) {
        return "unauthorized";
      }
      if (response.status === 400 || response.status === 422) {
        return "rejected";
      }
      // unexpected server state; treat like an outage and retry later
      return "spooled";
    } catch {
      return "spooled";
    }
  }
}
