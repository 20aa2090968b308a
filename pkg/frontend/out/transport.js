"use strict";
/**
 * Delivery of finished session logs to the ingestion service.
 *
 * Transmission happens off the capture path: the capture manager's sink only
 * enqueues, and network I/O runs afterwards. Logs that cannot be delivered
 * are spooled to disk and retried on the next activation. A log leaves the
 * spool only after the server acknowledges storage; logs the server rejects
 * as invalid are kept for diagnosis and not retried.
 */
var __createBinding = (this && this.__createBinding) || (Object.create ? (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    var desc = Object.getOwnPropertyDescriptor(m, k);
    if (!desc || ("get" in desc ? !m.__esModule : desc.writable || desc.configurable)) {
      desc = { enumerable: true, get: function() { return m[k]; } };
    }
    Object.defineProperty(o, k2, desc);
}) : (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    o[k2] = m[k];
}));
var __setModuleDefault = (this && this.__setModuleDefault) || (Object.create ? (function(o, v) {
    Object.defineProperty(o, "default", { enumerable: true, value: v });
}) : function(o, v) {
    o["default"] = v;
});
var __importStar = (this && this.__importStar) || (function () {
    var ownKeys = function(o) {
        ownKeys = Object.getOwnPropertyNames || function (o) {
            var ar = [];
            for (var k in o) if (Object.prototype.hasOwnProperty.call(o, k)) ar[ar.length] = k;
            return ar;
        };
        return ownKeys(o);
    };
    return function (mod) {
        if (mod && mod.__esModule) return mod;
        var result = {};
        if (mod != null) for (var k = ownKeys(mod), i = 0; i < k.length; i++) if (k[i] !== "default") __createBinding(result, mod, k[i]);
        __setModuleDefault(result, mod);
        return result;
    };
})();
Object.defineProperty(exports, "__esModule", { value: true });
exports.Transport = void 0;
const fs = __importStar(require("fs"));
const path = __importStar(require("path"));
const events_1 = require("./events");
const REJECTED_SUFFIX = ".rejected.json";
const PENDING_SUFFIX = ".pending.json";
class Transport {
    constructor(options) {
        this.serverUrl = options.serverUrl.replace(/\/+$/, "");
        this.token = options.token;
        this.spoolDir = options.spoolDir;
        this.fetchImpl = options.fetchImpl ?? fetch;
        this.diagnostic = options.onDiagnostic ?? (() => undefined);
    }
    setToken(token) {
        this.token = token;
    }
    /** Deliver one log, spooling it if the service is unreachable. */
    async send(log) {
        const document = (0, events_1.encodeLog)(log);
        const outcome = await this.post(document);
        if (outcome === "spooled") {
            this.writeSpool(log.session_id + PENDING_SUFFIX, document);
        }
        else if (outcome === "rejected") {
            this.writeSpool(log.session_id + REJECTED_SUFFIX, document);
            this.diagnostic(`server rejected session ${log.session_id}; kept in spool`);
        }
        else if (outcome === "unauthorized") {
            this.writeSpool(log.session_id + PENDING_SUFFIX, document);
            this.diagnostic("authentication failed; re-login required, log retained");
        }
        return outcome;
    }
    /** Retry spooled logs; each file is deleted only once the server stores it. */
    async retryPending() {
        let delivered = 0;
        for (const name of this.pendingFiles()) {
            const file = path.join(this.spoolDir, name);
            const outcome = await this.post(fs.readFileSync(file, "utf-8"));
            if (outcome === "stored") {
                fs.unlinkSync(file);
                delivered += 1;
            }
            else if (outcome === "rejected") {
                fs.renameSync(file, file.slice(0, -PENDING_SUFFIX.length) + REJECTED_SUFFIX);
            }
        }
        return delivered;
    }
    pendingCount() {
        return this.pendingFiles().length;
    }
    /** Drop everything awaiting transmission (user-initiated purge). */
    purgeSpool() {
        if (!fs.existsSync(this.spoolDir)) {
            return;
        }
        for (const name of fs.readdirSync(this.spoolDir)) {
            if (name.endsWith(PENDING_SUFFIX) || name.endsWith(REJECTED_SUFFIX)) {
                fs.unlinkSync(path.join(this.spoolDir, name));
            }
        }
    }
    pendingFiles() {
        if (!fs.existsSync(this.spoolDir)) {
            return [];
        }
        return fs
            .readdirSync(this.spoolDir)
            .filter((name) => name.endsWith(PENDING_SUFFIX))
            .sort();
    }
    writeSpool(name, document) {
        fs.mkdirSync(this.spoolDir, { recursive: true });
        fs.writeFileSync(path.join(this.spoolDir, name), document, "utf-8");
    }
    async post(document) {
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
        }
        catch {
            return "spooled";
        }
    }
}
exports.Transport = Transport;
//# sourceMappingURL=transport.js.map