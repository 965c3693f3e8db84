/** HTML builders for both views.
 *
 * Everything here maps API payload fields onto markup; no statistics are
 * computed client-side beyond sorting rows and binning the histogram.
 */

import { heatmapSvg, histogramSvg, rocSvg } from "./charts.js";
import { controlsLocked, shortHash, type WorkbenchState } from "./state.js";
import type { Report, ReportLF } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function show(value: number | null, digits = 3): string {
  return value === null ? "–" : value.toFixed(digits);
}

export type SortKey =
  | "name"
  | "coverage"
  | "conflict_mass"
  | "dev_accuracy"
  | "learned_accuracy"
  | "accuracy_gap";

export interface SortOrder {
  key: SortKey;
  descending: boolean;
}

/** Stable sort of report rows; nulls always sink to the bottom. */
export function sortLfs(lfs: ReportLF[], order: SortOrder): ReportLF[] {
  const indexed = lfs.map((lf, i) => ({ lf, i }));
  indexed.sort((a, b) => {
    const va = a.lf[order.key];
    const vb = b.lf[order.key];
    if (va === null && vb === null) return a.i - b.i;
    if (va === null) return 1;
    if (vb === null) return -1;
    let cmp: number;
    if (typeof va === "string" && typeof vb === "string") {
      cmp = va < vb ? -1 : va > vb ? 1 : 0;
    } else {
      cmp = (va as number) - (vb as number);
    }
    if (order.descending) cmp = -cmp;
    return cmp !== 0 ? cmp : a.i - b.i;
  });
  return indexed.map((e) => e.lf);
}

const TABLE_COLUMNS: { key: SortKey; label: string }[] = [
  { key: "name", label: "LF" },
  { key: "coverage", label: "coverage" },
  { key: "conflict_mass", label: "conflict" },
  { key: "dev_accuracy", label: "dev acc" },
  { key: "learned_accuracy", label: "learned acc" },
  { key: "accuracy_gap", label: "gap" },
];

export function statsTableHtml(report: Report, order: SortOrder): string {
  const rows = sortLfs(report.lfs, order)
    .map((lf) => {
      const classes: string[] = [];
      if (lf.flags.includes("below_chance")) classes.push("below-chance");
      if (lf.flags.includes("dependent")) classes.push("dependent");
      const flags = lf.flags
        .map((f) => `<span class="flag flag-${escapeHtml(f)}">${escapeHtml(f)}</span>`)
        .join(" ");
      const dependentWith = lf.dependent_with.length
        ? ` title="dependent with ${escapeHtml(lf.dependent_with.join(", "))}"`
        : "";
      return (
        `<tr class="${classes.join(" ")}" data-lf="${escapeHtml(lf.name)}"${dependentWith}>` +
        `<td>${escapeHtml(lf.name)}</td>` +
        `<td>${lf.coverage.toFixed(3)}</td>` +
        `<td>${lf.conflict_mass.toFixed(3)}</td>` +
        `<td>${show(lf.dev_accuracy)}</td>` +
        `<td>${show(lf.learned_accuracy)}</td>` +
        `<td>${show(lf.accuracy_gap)}</td>` +
        `<td>${flags || "–"}</td>` +
        `</tr>`
      );
    })
    .join("");
  const headers = TABLE_COLUMNS.map((col) => {
    const active = col.key === order.key;
    const arrow = active ? (order.descending ? " ▾" : " ▴") : "";
    return (
      `<th><button class="sort" data-sort="${col.key}">` +
      `${escapeHtml(col.label)}${arrow}</button></th>`
    );
  }).join("");
  return (
    `<table class="lf-table"><thead><tr>${headers}<th>flags</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function editorHtml(state: WorkbenchState): string {
  const locked = controlsLocked(state);
  const parts: string[] = [];
  if (state.networkError !== null) {
    parts.push(
      `<div class="banner error" role="alert">${escapeHtml(state.networkError)} ` +
        `<button id="retry">retry</button></div>`,
    );
  }
  parts.push(
    `<div class="hash-line">LF set <code id="lfset-hash">${escapeHtml(
      shortHash(state.lfsetVersion),
    )}</code> · model <code id="model-hash">${escapeHtml(
      shortHash(state.modelVersion),
    )}</code>${locked ? ' · <span class="busy">working…</span>' : ""}</div>`,
  );
  parts.push(
    `<textarea id="lf-editor" spellcheck="false"${locked ? " disabled" : ""}>` +
      `${escapeHtml(state.lfText)}</textarea>`,
  );
  if (state.inlineError !== null) {
    const where = state.inlineError.lfName
      ? `<strong>${escapeHtml(state.inlineError.lfName)}</strong>: `
      : "";
    parts.push(
      `<div class="inline-error" role="alert" data-lf="${escapeHtml(
        state.inlineError.lfName ?? "",
      )}">${where}${escapeHtml(state.inlineError.message)}</div>`,
    );
  }
  if (state.notice !== null) {
    parts.push(`<div class="notice">${escapeHtml(state.notice)}</div>`);
  }
  parts.push(
    `<div class="controls">` +
      `<button id="save" ${locked ? "disabled" : ""}>save &amp; refit</button>` +
      `<button id="refit" ${locked ? "disabled" : ""}>refit only</button>` +
      `</div>`,
  );
  return parts.join("");
}

export function diagnosticsHtml(state: WorkbenchState, order: SortOrder): string {
  if (state.report === null || state.matrixStats === null) {
    return `<div class="empty-state">No fit yet — save an LF file to run the pipeline.</div>`;
  }
  const parts: string[] = [];
  const beta = state.report.model.beta;
  parts.push(
    `<div class="summary-line">${state.report.n} documents · ${state.report.m} LFs` +
      (beta !== null ? ` · class balance ${beta.toFixed(4)}` : "") +
      ` · LF set <code>${escapeHtml(shortHash(state.report.lfset_version))}</code></div>`,
  );
  parts.push(statsTableHtml(state.report, order));

  const names = state.matrixStats.lfs.map((lf) => lf.name);
  const flagged = (state.matrixStats.independence?.flagged ?? []).map(
    (f) => [f.j, f.k] as [number, number],
  );
  parts.push(`<div class="charts">`);
  parts.push(
    `<figure><figcaption>pairwise overlap</figcaption>` +
      heatmapSvg(names, state.matrixStats.overlap, { title: "overlap", flagged }) +
      `</figure>`,
  );
  parts.push(
    `<figure><figcaption>pairwise conflict</figcaption>` +
      heatmapSvg(names, state.matrixStats.conflict, { title: "conflict", flagged }) +
      `</figure>`,
  );
  if (state.labels !== null) {
    parts.push(
      `<figure><figcaption>posterior distribution</figcaption>` +
        histogramSvg(state.labels.labels.map((l) => l.p)) +
        `</figure>`,
    );
  }
  if (state.devMetrics !== null && state.devMetrics.available) {
    const auc = state.devMetrics.posterior_auc;
    parts.push(
      `<figure><figcaption>dev ROC` +
        (auc !== null && auc !== undefined ? ` (AUC ${auc.toFixed(4)})` : "") +
        `</figcaption>` +
        rocSvg(state.devMetrics.roc ?? []) +
        `</figure>`,
    );
  } else if (state.devMetrics !== null) {
    parts.push(
      `<div class="empty-state">dev metrics unavailable: ${escapeHtml(
        state.devMetrics.reason ?? "no dev labels",
      )}</div>`,
    );
  }
  parts.push(`</div>`);
  return parts.join("");
}
