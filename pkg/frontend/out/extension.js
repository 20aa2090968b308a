"use strict";
/**
 * Editor glue: wires workspace and window hooks into the capture manager
 * and hands finished session logs to the transport.
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
exports.activate = activate;
exports.deactivate = deactivate;
const crypto_1 = require("crypto");
const path = __importStar(require("path"));
const vscode = __importStar(require("vscode"));
const capture_1 = require("./capture");
const transport_1 = require("./transport");
const CLIENT_VERSION = "0.1.0";
// line-comment markers per language id, used only when the filter is on
const LINE_COMMENTS = {
    python: "#",
    ruby: "#",
    shellscript: "#",
    yaml: "#",
    javascript: "//",
    typescript: "//",
    javascriptreact: "//",
    typescriptreact: "//",
    go: "//",
    rust: "//",
    java: "//",
    c: "//",
    cpp: "//",
    csharp: "//",
};
function isCodeDocument(document) {
    return document.uri.scheme === "file" && document.languageId !== "plaintext";
}
function insideLineComment(document, range) {
    const marker = LINE_COMMENTS[document.languageId];
    if (marker === undefined) {
        return false;
    }
    const lineText = document.lineAt(range.start.line).text;
    const at = lineText.indexOf(marker);
    return at >= 0 && range.start.character >= at;
}
function activate(context) {
    const config = vscode.workspace.getConfiguration("codetrail");
    if (!config.get("captureEnabled", false)) {
        // opt-in gate: nothing is captured or transmitted until enabled
        void vscode.window.showInformationMessage("Interaction capture is disabled. Set codetrail.captureEnabled to opt in.");
        return;
    }
    const output = vscode.window.createOutputChannel("codetrail");
    const spoolDir = config.get("spoolDir") ||
        path.join(context.globalStorageUri.fsPath, "spool");
    const transport = new transport_1.Transport({
        serverUrl: config.get("serverUrl", "http://127.0.0.1:8057"),
        token: config.get("token", ""),
        spoolDir,
        onDiagnostic: (message) => output.appendLine(message),
    });
    // per-machine anonymous id, stable across sessions
    let clientId = context.globalState.get("clientId");
    if (clientId === undefined) {
        clientId = (0, crypto_1.randomUUID)();
        void context.globalState.update("clientId", clientId);
    }
    const userId = config.get("userId") || clientId;
    const commentFilter = config.get("commentFilter", false);
    const idleFlushMs = config.get("idleFlushSeconds", 2) * 1000;
    const queue = [];
    const manager = new capture_1.CaptureManager((log) => queue.push(log), {
        userId,
        clientVersion: CLIENT_VERSION,
        idleFlushMs,
        onDiagnostic: (message) => output.appendLine(message),
    });
    // transmission stays off the handler path
    const drain = () => {
        while (queue.length > 0) {
            const log = queue.shift();
            void transport.send(log).then((outcome) => {
                if (outcome === "unauthorized") {
                    void vscode.window.showWarningMessage("Session log upload rejected: please log in again.");
                }
            });
        }
    };
    const flushTimer = setInterval(drain, 1000);
    context.subscriptions.push({ dispose: () => clearInterval(flushTimer) });
    void transport.retryPending();
    const editor = vscode.window.activeTextEditor;
    if (editor !== undefined && isCodeDocument(editor.document)) {
        manager.openFile(editor.document.uri.fsPath);
    }
    context.subscriptions.push(vscode.window.onDidChangeActiveTextEditor((active) => {
        if (active !== undefined && isCodeDocument(active.document)) {
            manager.openFile(active.document.uri.fsPath);
        }
        else {
            manager.closeFile();
        }
        drain();
    }), vscode.window.onDidChangeWindowState((state) => {
        manager.onWindowFocus(state.focused);
    }), vscode.workspace.onDidChangeTextDocument((change) => {
        if (!isCodeDocument(change.document)) {
            return;
        }
        for (const edit of change.contentChanges) {
            if (commentFilter && insideLineComment(change.document, edit.range)) {
                continue;
            }
            const line = edit.range.start.line;
            const lineText = line < change.document.lineCount
                ? change.document.lineAt(line).text
                : edit.text;
            manager.onDocumentChange(edit.text, "", lineText);
            if (edit.rangeLength > 0 && edit.text.length === 0) {
                // removal content is not available post-change; log the line
                manager.onDocumentChange("", lineText || " ", lineText);
            }
        }
    }), vscode.commands.registerCommand("codetrail.copy", async () => {
        await vscode.commands.executeCommand("editor.action.clipboardCopyAction");
        manager.onClipboardCommand("copy", await vscode.env.clipboard.readText());
    }), vscode.commands.registerCommand("codetrail.paste", async () => {
        manager.onClipboardCommand("paste", await vscode.env.clipboard.readText());
        await vscode.commands.executeCommand("editor.action.clipboardPasteAction");
    }), vscode.commands.registerCommand("codetrail.purgeSpool", () => {
        transport.purgeSpool();
        void vscode.window.showInformationMessage("Local spool purged.");
    }));
    context.subscriptions.push({
        dispose: () => {
            manager.shutdown();
            drain();
        },
    });
}
function deactivate() {
    // flush handled by the disposable registered in activate
}
//# sourceMappingURL=extension.js.map