/** Runtime validators for API payloads.
 *
 * The UI never invents numbers: everything rendered is read off one of
 * these payloads, so each shape is checked once at the API boundary and
 * the recorded fixtures are tested against the same validators.
 */

import type {
  CorpusSummary,
  DevMetrics,
  HealthResponse,
  LabelsResponse,
  LfsResponse,
  MatrixStats,
  ModelPayload,
  PutLfsResponse,
  Report,
  RocPoint,
} from "./types.js";

export class ContractError extends Error {}

function ctx(path: string, message: string): never {
  throw new ContractError(`${path}: ${message}`);
}

function obj(value: unknown, path: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    ctx(path, "expected an object");
  }
  return value as Record<string, unknown>;
}

function num(value: unknown, path: string): number {
  if (typeof value !== "number" || Number.isNaN(value)) {
    ctx(path, `expected a number, got ${JSON.stringify(value)}`);
  }
  return value;
}

function numOrNull(value: unknown, path: string): number | null {
  return value === null ? null : num(value, path);
}

function str(value: unknown, path: string): string {
  if (typeof value !== "string") {
    ctx(path, `expected a string, got ${JSON.stringify(value)}`);
  }
  return value;
}

function bool(value: unknown, path: string): boolean {
  if (typeof value !== "boolean") {
    ctx(path, `expected a boolean, got ${JSON.stringify(value)}`);
  }
  return value;
}

function arr(value: unknown, path: string): unknown[] {
  if (!Array.isArray(value)) {
    ctx(path, "expected an array");
  }
  return value;
}

function squareMatrix(value: unknown, size: number, path: string): number[][] {
  const rows = arr(value, path);
  if (rows.length !== size) {
    ctx(path, `expected ${size} rows, got ${rows.length}`);
  }
  return rows.map((row, i) => {
    const cells = arr(row, `${path}[${i}]`);
    if (cells.length !== size) {
      ctx(`${path}[${i}]`, `expected ${size} columns, got ${cells.length}`);
    }
    return cells.map((c, j) => num(c, `${path}[${i}][${j}]`));
  });
}

export function validateHealth(value: unknown): HealthResponse {
  const o = obj(value, "health");
  return {
    status: str(o.status, "health.status"),
    documents: num(o.documents, "health.documents"),
    lfs: num(o.lfs, "health.lfs"),
    lfset_version: str(o.lfset_version, "health.lfset_version"),
  };
}

export function validateCorpusSummary(value: unknown): CorpusSummary {
  const o = obj(value, "summary");
  return {
    n_documents: num(o.n_documents, "summary.n_documents"),
    n_dev: num(o.n_dev, "summary.n_dev"),
    mean_tokens: num(o.mean_tokens, "summary.mean_tokens"),
    min_tokens: num(o.min_tokens, "summary.min_tokens"),
    max_tokens: num(o.max_tokens, "summary.max_tokens"),
    sections: arr(o.sections, "summary.sections").map((s, i) =>
      str(s, `summary.sections[${i}]`),
    ),
  };
}

export function validateLfs(value: unknown): LfsResponse {
  const o = obj(value, "lfs");
  return {
    version: str(o.version, "lfs.version"),
    text: str(o.text, "lfs.text"),
    lfs: arr(o.lfs, "lfs.lfs").map((entry, i) => {
      const e = obj(entry, `lfs.lfs[${i}]`);
      return {
        name: str(e.name, `lfs.lfs[${i}].name`),
        emit: num(e.emit, `lfs.lfs[${i}].emit`),
        rule: e.rule,
      };
    }),
  };
}

export function validateReport(value: unknown): Report {
  const o = obj(value, "report");
  const model = obj(o.model, "report.model");
  return {
    n: num(o.n, "report.n"),
    m: num(o.m, "report.m"),
    lfset_version: str(o.lfset_version, "report.lfset_version"),
    lfs: arr(o.lfs, "report.lfs").map((entry, i) => {
      const e = obj(entry, `report.lfs[${i}]`);
      const p = `report.lfs[${i}]`;
      return {
        name: str(e.name, `${p}.name`),
        coverage: num(e.coverage, `${p}.coverage`),
        polarity: arr(e.polarity, `${p}.polarity`).map((v, j) =>
          num(v, `${p}.polarity[${j}]`),
        ),
        conflict_mass: num(e.conflict_mass, `${p}.conflict_mass`),
        dev_accuracy: numOrNull(e.dev_accuracy, `${p}.dev_accuracy`),
        dev_votes: numOrNull(e.dev_votes, `${p}.dev_votes`),
        learned_accuracy: numOrNull(e.learned_accuracy, `${p}.learned_accuracy`),
        accuracy_gap: numOrNull(e.accuracy_gap, `${p}.accuracy_gap`),
        flags: arr(e.flags, `${p}.flags`).map((f, j) => str(f, `${p}.flags[${j}]`)),
        dependent_with: arr(e.dependent_with, `${p}.dependent_with`).map((d, j) =>
          str(d, `${p}.dependent_with[${j}]`),
        ),
      };
    }),
    dependent_pairs: arr(o.dependent_pairs, "report.dependent_pairs").map(
      (entry, i) => {
        const e = obj(entry, `report.dependent_pairs[${i}]`);
        return {
          names: arr(e.names, `report.dependent_pairs[${i}].names`).map((n, j) =>
            str(n, `report.dependent_pairs[${i}].names[${j}]`),
          ),
        };
      },
    ),
    model: {
      beta: numOrNull(model.beta, "report.model.beta"),
      version: model.version === null ? null : str(model.version, "report.model.version"),
    },
  };
}

export function validatePutLfs(value: unknown): PutLfsResponse {
  const o = obj(value, "put_lfs");
  return {
    version: str(o.version, "put_lfs.version"),
    model_version: str(o.model_version, "put_lfs.model_version"),
    report: validateReport(o.report),
  };
}

export function validateMatrixStats(value: unknown): MatrixStats {
  const o = obj(value, "stats");
  const lfs = arr(o.lfs, "stats.lfs").map((entry, i) => {
    const e = obj(entry, `stats.lfs[${i}]`);
    return {
      name: str(e.name, `stats.lfs[${i}].name`),
      coverage: num(e.coverage, `stats.lfs[${i}].coverage`),
      polarity: arr(e.polarity, `stats.lfs[${i}].polarity`).map((v, j) =>
        num(v, `stats.lfs[${i}].polarity[${j}]`),
      ),
      dev_accuracy: numOrNull(e.dev_accuracy, `stats.lfs[${i}].dev_accuracy`),
      dev_votes: numOrNull(e.dev_votes, `stats.lfs[${i}].dev_votes`),
    };
  });
  const m = lfs.length;
  const out: MatrixStats = {
    n: num(o.n, "stats.n"),
    lfs,
    overlap: squareMatrix(o.overlap, m, "stats.overlap"),
    conflict: squareMatrix(o.conflict, m, "stats.conflict"),
    lfset_version: str(o.lfset_version, "stats.lfset_version"),
    warnings: obj(o.warnings, "stats.warnings"),
  };
  if (o.independence !== undefined) {
    const ind = obj(o.independence, "stats.independence");
    out.independence = {
      alpha: num(ind.alpha, "stats.independence.alpha"),
      p_values: arr(ind.p_values, "stats.independence.p_values").map((row, i) =>
        arr(row, `stats.independence.p_values[${i}]`).map((v, j) =>
          numOrNull(v, `stats.independence.p_values[${i}][${j}]`),
        ),
      ),
      low_expected: arr(ind.low_expected, "stats.independence.low_expected").map(
        (row, i) =>
          arr(row, `stats.independence.low_expected[${i}]`).map((v, j) =>
            bool(v, `stats.independence.low_expected[${i}][${j}]`),
          ),
      ),
      flagged: arr(ind.flagged, "stats.independence.flagged").map((entry, i) => {
        const e = obj(entry, `stats.independence.flagged[${i}]`);
        return {
          j: num(e.j, `stats.independence.flagged[${i}].j`),
          k: num(e.k, `stats.independence.flagged[${i}].k`),
          names: arr(e.names, `stats.independence.flagged[${i}].names`).map(
            (n, x) => str(n, `stats.independence.flagged[${i}].names[${x}]`),
          ),
        };
      }),
    };
  }
  return out;
}

function validateRocPoint(value: unknown, path: string): RocPoint {
  const o = obj(value, path);
  return {
    fpr: num(o.fpr, `${path}.fpr`),
    tpr: num(o.tpr, `${path}.tpr`),
    threshold: o.threshold === null ? null : num(o.threshold, `${path}.threshold`),
  };
}

export function validateDevMetrics(value: unknown): DevMetrics {
  const o = obj(value, "dev");
  const available = bool(o.available, "dev.available");
  if (!available) {
    return { available, reason: str(o.reason, "dev.reason") };
  }
  return {
    available,
    n_dev: num(o.n_dev, "dev.n_dev"),
    lfs: arr(o.lfs, "dev.lfs").map((entry, i) => {
      const e = obj(entry, `dev.lfs[${i}]`);
      return {
        name: str(e.name, `dev.lfs[${i}].name`),
        dev_accuracy: numOrNull(e.dev_accuracy, `dev.lfs[${i}].dev_accuracy`),
        dev_votes: numOrNull(e.dev_votes, `dev.lfs[${i}].dev_votes`),
        learned_accuracy: numOrNull(
          e.learned_accuracy,
          `dev.lfs[${i}].learned_accuracy`,
        ),
        accuracy_gap: numOrNull(e.accuracy_gap, `dev.lfs[${i}].accuracy_gap`),
      };
    }),
    posterior_auc: numOrNull(o.posterior_auc, "dev.posterior_auc"),
    roc: arr(o.roc, "dev.roc").map((p, i) => validateRocPoint(p, `dev.roc[${i}]`)),
  };
}

export function validateLabels(value: unknown): LabelsResponse {
  const o = obj(value, "labels");
  return {
    model_version: str(o.model_version, "labels.model_version"),
    labels: arr(o.labels, "labels.labels").map((entry, i) => {
      const e = obj(entry, `labels.labels[${i}]`);
      const p = num(e.p, `labels.labels[${i}].p`);
      if (p < 0 || p > 1) {
        ctx(`labels.labels[${i}].p`, `probability out of range: ${p}`);
      }
      return {
        doc_id: str(e.doc_id, `labels.labels[${i}].doc_id`),
        p,
        excluded: bool(e.excluded, `labels.labels[${i}].excluded`),
      };
    }),
  };
}

export function validateModel(value: unknown): ModelPayload {
  const o = obj(value, "model");
  const structure = obj(o.structure, "model.structure");
  return {
    beta: num(o.beta, "model.beta"),
    lfs: arr(o.lfs, "model.lfs").map((entry, i) => {
      const e = obj(entry, `model.lfs[${i}]`);
      return {
        name: str(e.name, `model.lfs[${i}].name`),
        propensity: num(e.propensity, `model.lfs[${i}].propensity`),
        accuracy: num(e.accuracy, `model.lfs[${i}].accuracy`),
      };
    }),
    model_version: str(o.model_version, "model.model_version"),
    lfset_version: str(o.lfset_version, "model.lfset_version"),
    structure: {
      mode: str(structure.mode, "model.structure.mode"),
      edges: arr(structure.edges, "model.structure.edges").map((entry, i) => {
        const e = obj(entry, `model.structure.edges[${i}]`);
        return {
          j: num(e.j, `model.structure.edges[${i}].j`),
          k: num(e.k, `model.structure.edges[${i}].k`),
          names: arr(e.names, `model.structure.edges[${i}].names`).map((n, x) =>
            str(n, `model.structure.edges[${i}].names[${x}]`),
          ),
        };
      }),
    },
    meta: o.meta === undefined ? undefined : obj(o.meta, "model.meta"),
  };
}

export function validateApiError(value: unknown): string {
  const o = obj(value, "error");
  return str(o.error, "error.error");
}
