// Thin JSON client for the map service. All reasoning happens server-side;
// this module only moves documents and results back and forth.

import type {
  EditOp,
  ErrorBody,
  InferenceResultJson,
  MapResponse,
  PatchResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ErrorBody) {
    super(body.message || `request failed (${status})`);
    this.status = status;
    this.code = body.code || "error";
    this.detail = body.detail;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const error = (payload ?? {}) as ErrorBody;
      throw new ApiError(response.status, {
        code: error.code ?? "error",
        message: error.message ?? `HTTP ${response.status}`,
        detail: error.detail,
      });
    }
    return payload as T;
  }

  health(): Promise<{ status: string; kb_events: number }> {
    return this.request("GET", "/health");
  }

  listMaps(): Promise<{ maps: { map_id: string; saved?: boolean; revision?: number }[] }> {
    return this.request("GET", "/maps");
  }

  getMap(mapId: string): Promise<MapResponse> {
    return this.request("GET", `/maps/${encodeURIComponent(mapId)}`);
  }

  buildMap(
    sources: (string | { concept: string; value?: string })[],
    target: string,
  ): Promise<MapResponse & { diagnostics: unknown }> {
    return this.request("POST", "/maps/build", { sources, target });
  }

  whatif(mapId: string, edits: EditOp[]): Promise<InferenceResultJson> {
    return this.request("POST", `/maps/${encodeURIComponent(mapId)}/whatif`, { edits });
  }

  patch(mapId: string, edits: EditOp[], expectedRevision: number): Promise<PatchResponse> {
    return this.request("PATCH", `/maps/${encodeURIComponent(mapId)}`, {
      edits,
      expected_revision: expectedRevision,
    });
  }

  save(mapId: string): Promise<{ map_id: string; revision: number; path: string }> {
    return this.request("POST", `/maps/${encodeURIComponent(mapId)}/save`);
  }
}
