/** Workbench state and the transitions driving both views.
 *
 * State is a plain value updated by pure functions; the DOM layer
 * re-renders from it after every transition. Mutating requests
 * (save, refit) run through RequestQueue so they never overlap.
 */

import type {
  DevMetrics,
  LabelsResponse,
  MatrixStats,
  ModelPayload,
  Report,
} from "./types.js";

export type Status = "idle" | "saving" | "fitting" | "loading";

export interface InlineError {
  /** LF named in the server's parse error, when one could be extracted. */
  lfName: string | null;
  message: string;
}

export interface WorkbenchState {
  /** Editor contents (may differ from what the server has accepted). */
  lfText: string;
  /** Last LF text the server accepted. */
  savedText: string;
  /** Server-reported LF-set hash; "" before the first load. */
  lfsetVersion: string;
  modelVersion: string;
  status: Status;
  /** Transient notice shown near the save control. */
  notice: string | null;
  /** Parse/validation error shown inline in the editor. */
  inlineError: InlineError | null;
  /** Connectivity banner; non-null message offers a retry. */
  networkError: string | null;
  report: Report | null;
  matrixStats: MatrixStats | null;
  devMetrics: DevMetrics | null;
  labels: LabelsResponse | null;
  model: ModelPayload | null;
}

export function initialState(): WorkbenchState {
  return {
    lfText: "",
    savedText: "",
    lfsetVersion: "",
    modelVersion: "",
    status: "loading",
    notice: null,
    inlineError: null,
    networkError: null,
    report: null,
    matrixStats: null,
    devMetrics: null,
    labels: null,
    model: null,
  };
}

/** The save/fit controls are locked while a mutation is in flight. */
export function controlsLocked(state: WorkbenchState): boolean {
  return state.status === "saving" || state.status === "fitting" || state.status === "loading";
}

export function editText(state: WorkbenchState, text: string): WorkbenchState {
  return { ...state, lfText: text, notice: null };
}

/** Saving identical content is a no-op: the hash cannot change. */
export function isNoopSave(state: WorkbenchState): boolean {
  return state.lfText === state.savedText && state.lfsetVersion !== "";
}

export function beginSave(state: WorkbenchState): WorkbenchState {
  return { ...state, status: "saving", notice: null, inlineError: null, networkError: null };
}

export function noopSave(state: WorkbenchState): WorkbenchState {
  return {
    ...state,
    status: "idle",
    notice: `no changes to save (LF set ${shortHash(state.lfsetVersion)} unchanged)`,
  };
}

export function saveSucceeded(
  state: WorkbenchState,
  version: string,
  modelVersion: string,
  report: Report,
): WorkbenchState {
  return {
    ...state,
    status: "idle",
    savedText: state.lfText,
    lfsetVersion: version,
    modelVersion,
    report,
    inlineError: null,
    notice: `saved and refitted (LF set ${shortHash(version)})`,
  };
}

/** Extract the LF name from messages like "LF 'lf_pneumo': bad regex". */
export function offendingLf(message: string): string | null {
  const match = message.match(/LF '([^']+)'/);
  return match ? match[1] : null;
}

export function saveRejected(state: WorkbenchState, message: string): WorkbenchState {
  return {
    ...state,
    status: "idle",
    inlineError: { lfName: offendingLf(message), message },
  };
}

export function beginFit(state: WorkbenchState): WorkbenchState {
  return { ...state, status: "fitting", notice: null, networkError: null };
}

export function fitSucceeded(state: WorkbenchState, model: ModelPayload): WorkbenchState {
  return {
    ...state,
    status: "idle",
    model,
    modelVersion: model.model_version,
    notice: "refit complete",
  };
}

export function fitRejected(state: WorkbenchState, message: string): WorkbenchState {
  return { ...state, status: "idle", notice: `refit rejected: ${message}` };
}

export function networkFailed(state: WorkbenchState, message: string): WorkbenchState {
  return { ...state, status: "idle", networkError: message };
}

export function clearNetworkError(state: WorkbenchState): WorkbenchState {
  return { ...state, networkError: null };
}

export interface Snapshot {
  lfs: { version: string; text: string };
  report: Report;
  matrixStats: MatrixStats;
  devMetrics: DevMetrics;
  labels: LabelsResponse;
  model: ModelPayload;
}

export function snapshotLoaded(state: WorkbenchState, snap: Snapshot): WorkbenchState {
  return {
    ...state,
    status: "idle",
    lfText: state.lfText === state.savedText ? snap.lfs.text : state.lfText,
    savedText: snap.lfs.text,
    lfsetVersion: snap.lfs.version,
    modelVersion: snap.model.model_version,
    report: snap.report,
    matrixStats: snap.matrixStats,
    devMetrics: snap.devMetrics,
    labels: snap.labels,
    model: snap.model,
  };
}

export function shortHash(hash: string): string {
  return hash.slice(0, 12);
}

/** Serializes mutating requests; reads are free to race. */
export class RequestQueue {
  private tail: Promise<unknown> = Promise.resolve();

  /** Number of queued-or-running tasks, for disabling controls. */
  pending = 0;

  enqueue<T>(task: () => Promise<T>): Promise<T> {
    this.pending += 1;
    const run = this.tail.then(task);
    this.tail = run.catch(() => undefined).then(() => {
      this.pending -= 1;
    });
    return run;
  }
}
