/**
 * Editor glue: wires workspace and window hooks into the capture manager
 * and hands finished session logs to the transport.
 */

import { randomUUID } from "crypto";
import * as path from "path";
import * as vscode from "vscode";
import { CaptureManager } from "./capture";
import { WireSessionLog } from "./events";
import { Transport } from "./transport";

const CLIENT_VERSION = "0.1.0";

// line-comment markers per language id, used only when the filter is on
const LINE_COMMENTS: Record<string, string> = {
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

function isCodeDocument(document: vscode.TextDocument): boolean {
  return document.uri.scheme === "file" && document.languageId !== "plaintext";
}

function insideLineComment(
  document: vscode.TextDocument,
  range: vscode.Range,
): boolean {
  const marker = LINE_COMMENTS[document.languageId];
  if (marker === undefined) {
    return false;
  }
  const lineText = document.lineAt(range.start.line).text;
  const at = lineText.indexOf(marker);
  return at >= 0 && range.start.character >= at;
}

export function activate(context: vscode.ExtensionContext): void {
  const config = vscode.workspace.getConfiguration("codetrail");
  if (!config.get<boolean>("captureEnabled", false)) {
    // opt-in gate: nothing is captured or transmitted until enabled
    void vscode.window.showInformationMessage(
      "Interaction capture is disabled. Set codetrail.captureEnabled to opt in.",
    );
    return;
  }

  const output = vscode.window.createOutputChannel("codetrail");
  const spoolDir =
    config.get<string>("spoolDir") ||
    path.join(context.globalStorageUri.fsPath, "spool");
  const transport = new Transport({
    serverUrl: config.get<string>("serverUrl", "http://127.0.0.1:8057"),
    token: config.get<string>("token", ""),
    spoolDir,
    onDiagnostic: (message) => output.appendLine(message),
  });

  // per-machine anonymous id, stable across sessions
  let clientId = context.globalState.get<string>("clientId");
  if (clientId === undefined) {
    clientId = randomUUID();
    void context.globalState.update("clientId", clientId);
  }
  const userId = config.get<string>("userId") || clientId;

  const commentFilter = config.get<boolean>("commentFilter", false);
  const idleFlushMs =
    config.get<number>("idleFlushSeconds", 2) * 1000;

  const queue: WireSessionLog[] = [];
  const manager = new CaptureManager((log) => queue.push(log), {
    userId,
    clientVersion: CLIENT_VERSION,
    idleFlushMs,
    onDiagnostic: (message) => output.appendLine(message),
  });

  // transmission stays off the handler path
  const drain = (): void => {
    while (queue.length > 0) {
      const log = queue.shift() as WireSessionLog;
      void transport.send(log).then((outcome) => {
        if (outcome === "unauthorized") {
          void vscode.window.showWarningMessage(
            "Session log upload rejected: please log in again.",
          );
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

  context.subscriptions.push(
    vscode.window.onDidChangeActiveTextEditor((active) => {
      if (active !== undefined && isCodeDocument(active.document)) {
        manager.openFile(active.document.uri.fsPath);
      } else {
        manager.closeFile();
      }
      drain();
    }),
    vscode.window.onDidChangeWindowState((state) => {
      manager.onWindowFocus(state.focused);
    }),
    vscode.workspace.onDidChangeTextDocument((change) => {
      if (!isCodeDocument(change.document)) {
        return;
      }
      for (const edit of change.contentChanges) {
        if (commentFilter && insideLineComment(change.document, edit.range)) {
          continue;
        }
        const line = edit.range.start.line;
        const lineText =
          line < change.document.lineCount
            ? change.document.lineAt(line).text
            : edit.text;
        manager.onDocumentChange(edit.text, "", lineText);
        if (edit.rangeLength > 0 && edit.text.length === 0) {
          // removal content is not available post-change; log the line
          manager.onDocumentChange("", lineText || " ", lineText);
        }
      }
    }),
    vscode.commands.registerCommand("codetrail.copy", async () => {
      await vscode.commands.executeCommand(
        "editor.action.clipboardCopyAction",
      );
      manager.onClipboardCommand(
        "copy",
        await vscode.env.clipboard.readText(),
      );
    }),
    vscode.commands.registerCommand("codetrail.paste", async () => {
      manager.onClipboardCommand(
        "paste",
        await vscode.env.clipboard.readText(),
      );
      await vscode.commands.executeCommand(
        "editor.action.clipboardPasteAction",
      );
    }),
    vscode.commands.registerCommand("codetrail.purgeSpool", () => {
      transport.purgeSpool();
      void vscode.window.showInformationMessage("Local spool purged.");
    }),
  );

  context.subscriptions.push({
    dispose: () => {
      manager.shutdown();
      drain();
    },
  });
}

export function deactivate(): void {
  // flush handled by the disposable registered in activate
}
