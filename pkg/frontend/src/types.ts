/** Payload shapes for every /api endpoint the workbench consumes. */

export interface HealthResponse {
  status: string;
  documents: number;
  lfs: number;
  lfset_version: string;
}

export interface CorpusSummary {
  n_documents: number;
  n_dev: number;
  mean_tokens: number;
  min_tokens: number;
  max_tokens: number;
  sections: string[];
}

export interface LFCanonical {
  name: string;
  emit: number;
  rule: unknown;
}

export interface LfsResponse {
  version: string;
  text: string;
  lfs: LFCanonical[];
}

export interface ReportLF {
  name: string;
  coverage: number;
  polarity: number[];
  conflict_mass: number;
  dev_accuracy: number | null;
  dev_votes: number | null;
  learned_accuracy: number | null;
  accuracy_gap: number | null;
  flags: string[];
  dependent_with: string[];
}

export interface Report {
  n: number;
  m: number;
  lfset_version: string;
  lfs: ReportLF[];
  dependent_pairs: { names: string[] }[];
  model: { beta: number | null; version: string | null };
}

export interface PutLfsResponse {
  version: string;
  model_version: string;
  report: Report;
}

export interface FlaggedPair {
  j: number;
  k: number;
  names: string[];
}

export interface IndependenceInfo {
  alpha: number;
  p_values: (number | null)[][];
  low_expected: boolean[][];
  flagged: FlaggedPair[];
}

export interface StatsLF {
  name: string;
  coverage: number;
  polarity: number[];
  dev_accuracy: number | null;
  dev_votes: number | null;
}

export interface MatrixStats {
  n: number;
  lfs: StatsLF[];
  overlap: number[][];
  conflict: number[][];
  lfset_version: string;
  warnings: Record<string, unknown>;
  independence?: IndependenceInfo;
}

export interface RocPoint {
  fpr: number;
  tpr: number;
  threshold: number | null;
}

export interface DevMetricsLF {
  name: string;
  dev_accuracy: number | null;
  dev_votes: number | null;
  learned_accuracy: number | null;
  accuracy_gap: number | null;
}

export interface DevMetrics {
  available: boolean;
  reason?: string;
  n_dev?: number;
  lfs?: DevMetricsLF[];
  posterior_auc?: number | null;
  roc?: RocPoint[];
}

export interface LabelEntry {
  doc_id: string;
  p: number;
  excluded: boolean;
}

export interface LabelsResponse {
  model_version: string;
  labels: LabelEntry[];
}

export interface ModelLF {
  name: string;
  propensity: number;
  accuracy: number;
}

export interface StructureEdge {
  j: number;
  k: number;
  names: string[];
}

export interface ModelPayload {
  beta: number;
  lfs: ModelLF[];
  model_version: string;
  lfset_version: string;
  structure: { mode: string; edges: StructureEdge[] };
  meta?: Record<string, unknown>;
}

export interface ApiErrorBody {
  error: string;
}
