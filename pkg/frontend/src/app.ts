/** DOM wiring: mounts the editor and diagnostics views and routes events
 * through the pure state transitions. This module is the only one that
 * touches `document`.
 */

import { ApiClient } from "./api.js";
import { diagnosticsHtml, editorHtml } from "./render.js";
import {
  beginFit,
  beginSave,
  clearNetworkError,
  editText,
  fitRejected,
  fitSucceeded,
  initialState,
  isNoopSave,
  networkFailed,
  noopSave,
  RequestQueue,
  saveRejected,
  saveSucceeded,
  snapshotLoaded,
  type WorkbenchState,
} from "./state.js";
import type { SortOrder, SortKey } from "./render.js";

type View = "editor" | "diagnostics";

const api = new ApiClient("");
const queue = new RequestQueue();
let state: WorkbenchState = initialState();
let view: View = "editor";
let sortOrder: SortOrder = { key: "name", descending: false };

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function setState(next: WorkbenchState): void {
  state = next;
  render();
}

async function loadSnapshot(): Promise<void> {
  const [lfs, report, stats, dev, labels, model] = await Promise.all([
    api.getLfs(),
    api.getReport(),
    api.getMatrixStats(),
    api.getDevMetrics(),
    api.getLabels(),
    api.getModel(),
  ]);
  for (const result of [lfs, report, stats, dev, labels, model]) {
    if (!result.ok) {
      setState(networkFailed(state, result.error));
      return;
    }
  }
  if (lfs.ok && report.ok && stats.ok && dev.ok && labels.ok && model.ok) {
    setState(
      snapshotLoaded(state, {
        lfs: lfs.data,
        report: report.data,
        matrixStats: stats.data,
        devMetrics: dev.data,
        labels: labels.data,
        model: model.data,
      }),
    );
  }
}

function onSave(): void {
  if (isNoopSave(state)) {
    setState(noopSave(state));
    return;
  }
  setState(beginSave(state));
  void queue.enqueue(async () => {
    const result = await api.putLfs(state.lfText);
    if (!result.ok) {
      if (result.status === 0) {
        setState(networkFailed(state, result.error));
      } else {
        setState(saveRejected(state, result.error));
      }
      return;
    }
    setState(
      saveSucceeded(state, result.data.version, result.data.model_version, result.data.report),
    );
    await loadSnapshot();
  });
}

function onRefit(): void {
  setState(beginFit(state));
  void queue.enqueue(async () => {
    const result = await api.postFit({});
    if (!result.ok) {
      if (result.status === 0) {
        setState(networkFailed(state, result.error));
      } else {
        setState(fitRejected(state, result.error));
      }
      return;
    }
    setState(fitSucceeded(state, result.data));
    await loadSnapshot();
  });
}

function render(): void {
  el("tab-editor").classList.toggle("active", view === "editor");
  el("tab-diagnostics").classList.toggle("active", view === "diagnostics");
  const main = el("view");
  if (view === "editor") {
    main.innerHTML = editorHtml(state);
    const editor = document.getElementById("lf-editor") as HTMLTextAreaElement | null;
    editor?.addEventListener("input", () => {
      state = editText(state, editor.value);
    });
    document.getElementById("save")?.addEventListener("click", onSave);
    document.getElementById("refit")?.addEventListener("click", onRefit);
    document.getElementById("retry")?.addEventListener("click", () => {
      setState(clearNetworkError(state));
      void loadSnapshot();
    });
  } else {
    main.innerHTML = diagnosticsHtml(state, sortOrder);
    main.querySelectorAll<HTMLButtonElement>("button.sort").forEach((button) => {
      button.addEventListener("click", () => {
        const key = button.dataset.sort as SortKey;
        sortOrder =
          sortOrder.key === key
            ? { key, descending: !sortOrder.descending }
            : { key, descending: key !== "name" };
        render();
      });
    });
  }
}

export function start(): void {
  el("tab-editor").addEventListener("click", () => {
    view = "editor";
    render();
  });
  el("tab-diagnostics").addEventListener("click", () => {
    view = "diagnostics";
    render();
  });
  render();
  void loadSnapshot();
}

start();
