/** Hand-rolled SVG builders for the diagnostics view.
 *
 * Pure string generators: no DOM access, so they are unit-testable in
 * node and render identically wherever the markup is injected.
 */

import type { RocPoint } from "./types.js";

export const HISTOGRAM_BINS = 20;

/** Counts of posterior probabilities in 20 equal-width bins over [0, 1]. */
export function binPosteriors(ps: number[]): number[] {
  const counts = new Array<number>(HISTOGRAM_BINS).fill(0);
  for (const p of ps) {
    if (p < 0 || p > 1 || Number.isNaN(p)) {
      throw new Error(`posterior out of range: ${p}`);
    }
    const bin = Math.min(Math.floor(p * HISTOGRAM_BINS), HISTOGRAM_BINS - 1);
    counts[bin] += 1;
  }
  return counts;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Intensity in [0, 1] under a scale fixed to [0, max] for this render. */
export function intensity(value: number, max: number): number {
  if (max <= 0) {
    return 0;
  }
  return Math.max(0, Math.min(1, value / max));
}

function cellColor(value: number, max: number): string {
  const t = intensity(value, max);
  const level = Math.round(255 - t * 205);
  return `rgb(${level - 30 < 0 ? 0 : level - 30}, ${level}, 255)`;
}

export interface HeatmapOptions {
  title: string;
  /** Pairs (by index) to outline as dependent. */
  flagged?: [number, number][];
  cellSize?: number;
}

/** m-by-m heatmap; color scale spans [0, max(values)] per render. */
export function heatmapSvg(
  names: string[],
  values: number[][],
  options: HeatmapOptions,
): string {
  const m = names.length;
  if (values.length !== m || values.some((row) => row.length !== m)) {
    throw new Error(`heatmap needs an ${m}x${m} matrix`);
  }
  const cell = options.cellSize ?? 34;
  const label = 110;
  const size = label + m * cell;
  const max = Math.max(0, ...values.flat());
  const flagged = new Set(
    (options.flagged ?? []).flatMap(([j, k]) => [`${j},${k}`, `${k},${j}`]),
  );

  const parts: string[] = [];
  parts.push(
    `<svg class="heatmap" role="img" aria-label="${esc(options.title)}" ` +
      `viewBox="0 0 ${size} ${size}" width="${size}" height="${size}">`,
  );
  for (let j = 0; j < m; j++) {
    for (let k = 0; k < m; k++) {
      const v = values[j][k];
      const isFlagged = flagged.has(`${j},${k}`);
      const x = label + k * cell;
      const y = label + j * cell;
      parts.push(
        `<rect class="cell${isFlagged ? " flagged" : ""}" ` +
          `x="${x}" y="${y}" width="${cell}" height="${cell}" ` +
          `fill="${cellColor(v, max)}" data-value="${v.toFixed(4)}">` +
          `<title>${esc(names[j])} × ${esc(names[k])}: ${v.toFixed(4)}</title></rect>`,
      );
    }
  }
  for (let j = 0; j < m; j++) {
    const mid = label + j * cell + cell / 2;
    parts.push(
      `<text class="axis" x="${label - 6}" y="${mid + 4}" text-anchor="end">` +
        `${esc(names[j])}</text>`,
    );
    parts.push(
      `<text class="axis" x="${label + j * cell + cell / 2}" y="${label - 8}" ` +
        `text-anchor="start" transform="rotate(-45 ${label + j * cell + cell / 2} ${label - 8})">` +
        `${esc(names[j])}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Posterior histogram: 20 equal-width bins of p with count tooltips. */
export function histogramSvg(ps: number[]): string {
  const counts = binPosteriors(ps);
  const maxCount = Math.max(1, ...counts);
  const barWidth = 22;
  const height = 140;
  const baseline = height - 20;
  const width = HISTOGRAM_BINS * barWidth + 40;

  const parts: string[] = [];
  parts.push(
    `<svg class="histogram" role="img" aria-label="posterior histogram" ` +
      `viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`,
  );
  counts.forEach((count, i) => {
    const h = Math.round((baseline - 10) * (count / maxCount));
    const x = 30 + i * barWidth;
    const lo = (i / HISTOGRAM_BINS).toFixed(2);
    const hi = ((i + 1) / HISTOGRAM_BINS).toFixed(2);
    parts.push(
      `<rect class="bar" x="${x}" y="${baseline - h}" width="${barWidth - 2}" ` +
        `height="${h}" data-count="${count}">` +
        `<title>p ∈ [${lo}, ${hi}${i === HISTOGRAM_BINS - 1 ? "]" : ")"}: ${count}</title></rect>`,
    );
  });
  parts.push(
    `<text class="axis" x="30" y="${height - 4}">0</text>` +
      `<text class="axis" x="${30 + HISTOGRAM_BINS * barWidth - 8}" y="${height - 4}">1</text>`,
  );
  parts.push("</svg>");
  return parts.join("");
}

/** Dev-set ROC curve with the chance diagonal. */
export function rocSvg(points: RocPoint[]): string {
  const size = 220;
  const pad = 24;
  const span = size - 2 * pad;
  const sx = (fpr: number) => pad + fpr * span;
  const sy = (tpr: number) => size - pad - tpr * span;
  const path = points
    .map((p) => `${sx(p.fpr).toFixed(1)},${sy(p.tpr).toFixed(1)}`)
    .join(" ");
  return (
    `<svg class="roc" role="img" aria-label="dev ROC" viewBox="0 0 ${size} ${size}" ` +
    `width="${size}" height="${size}">` +
    `<rect class="frame" x="${pad}" y="${pad}" width="${span}" height="${span}" fill="none"/>` +
    `<line class="chance" x1="${sx(0)}" y1="${sy(0)}" x2="${sx(1)}" y2="${sy(1)}"/>` +
    `<polyline class="curve" fill="none" points="${path}"/>` +
    `<text class="axis" x="${size / 2 - 10}" y="${size - 4}">FPR</text>` +
    `<text class="axis" x="4" y="${size / 2}" transform="rotate(-90 10 ${size / 2})">TPR</text>` +
    `</svg>`
  );
}
