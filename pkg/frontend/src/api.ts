/** Thin typed client over the /api contract.
 *
 * Every call resolves to an ApiResult; network failures and HTTP error
 * bodies are folded into the same shape so views never touch exceptions.
 */

import {
  validateApiError,
  validateCorpusSummary,
  validateDevMetrics,
  validateHealth,
  validateLabels,
  validateLfs,
  validateMatrixStats,
  validateModel,
  validatePutLfs,
  validateReport,
} from "./contract.js";
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
} from "./types.js";

export type ApiResult<T> =
  | { ok: true; data: T }
  | { ok: false; status: number; error: string };

export type FetchLike = (
  url: string,
  init?: { method?: string; body?: string; headers?: Record<string, string> },
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export interface FitOverrides {
  max_iter?: number;
  tol?: number;
  step?: number;
  init_accuracy?: number;
  init_beta?: number | null;
  pin_beta?: number | null;
  seed?: number;
  structure_mode?: string;
  structure_threshold?: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    validate: (value: unknown) => T,
    body?: string,
  ): Promise<ApiResult<T>> {
    let response: Awaited<ReturnType<FetchLike>>;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        body,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      });
    } catch (exc) {
      return { ok: false, status: 0, error: `network failure: ${String(exc)}` };
    }
    let payload: unknown;
    try {
      payload = await response.json();
    } catch (exc) {
      return {
        ok: false,
        status: response.status,
        error: `invalid JSON from server: ${String(exc)}`,
      };
    }
    if (!response.ok) {
      let message: string;
      try {
        message = validateApiError(payload);
      } catch {
        message = `HTTP ${response.status}`;
      }
      return { ok: false, status: response.status, error: message };
    }
    try {
      return { ok: true, data: validate(payload) };
    } catch (exc) {
      return {
        ok: false,
        status: response.status,
        error: `contract violation: ${String(exc)}`,
      };
    }
  }

  getHealth(): Promise<ApiResult<HealthResponse>> {
    return this.request("GET", "/api/health", validateHealth);
  }

  getCorpusSummary(): Promise<ApiResult<CorpusSummary>> {
    return this.request("GET", "/api/corpus/summary", validateCorpusSummary);
  }

  getLfs(): Promise<ApiResult<LfsResponse>> {
    return this.request("GET", "/api/lfs", validateLfs);
  }

  putLfs(text: string): Promise<ApiResult<PutLfsResponse>> {
    return this.request("PUT", "/api/lfs", validatePutLfs, text);
  }

  postFit(overrides: FitOverrides = {}): Promise<ApiResult<ModelPayload>> {
    return this.request("POST", "/api/fit", validateModel, JSON.stringify(overrides));
  }

  getMatrixStats(): Promise<ApiResult<MatrixStats>> {
    return this.request("GET", "/api/matrix/stats", validateMatrixStats);
  }

  getDevMetrics(): Promise<ApiResult<DevMetrics>> {
    return this.request("GET", "/api/dev/metrics", validateDevMetrics);
  }

  getLabels(): Promise<ApiResult<LabelsResponse>> {
    return this.request("GET", "/api/labels", validateLabels);
  }

  getModel(): Promise<ApiResult<ModelPayload>> {
    return this.request("GET", "/api/model", validateModel);
  }

  getReport(): Promise<ApiResult<Report>> {
    return this.request("GET", "/api/report", validateReport);
  }
}
