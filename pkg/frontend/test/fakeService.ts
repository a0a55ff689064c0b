// In-memory stand-in for the map service, recording every request. Canned
// inference results come from fixture files generated by the real engine,
// keyed by canonical edit content, so the UI never invents a verdict.

import type { EditOp, InferenceResultJson, MapDocument } from "../src/types.js";
import type { FetchLike } from "../src/api.js";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export interface FakeServiceOptions {
  mapId: string;
  document: MapDocument;
  baseResult: InferenceResultJson;
  whatifResults?: Record<string, InferenceResultJson>;
  failPatchWith409?: boolean;
}

function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class FakeService {
  readonly requests: RecordedRequest[] = [];
  private document: MapDocument;
  private result: InferenceResultJson;
  private revision = 0;

  constructor(private readonly options: FakeServiceOptions) {
    this.document = JSON.parse(JSON.stringify(options.document));
    this.result = options.baseResult;
  }

  get persistedDocument(): MapDocument {
    return this.document;
  }

  get currentRevision(): number {
    return this.revision;
  }

  requestsTo(method: string, suffix: string): RecordedRequest[] {
    return this.requests.filter(
      (r) => r.method === method && r.path.endsWith(suffix),
    );
  }

  private lookupWhatif(edits: EditOp[]): InferenceResultJson {
    if (edits.length === 0) {
      return this.result;
    }
    const key = JSON.stringify(edits);
    const canned = this.options.whatifResults?.[key];
    if (!canned) {
      throw new Error(`fake service has no canned result for edits ${key}`);
    }
    return canned;
  }

  fetch: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const url = input.toString();
    const path = url.replace(/^https?:\/\/[^/]+/, "").replace(/^\.\./, "");
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.requests.push({ method, path, body });

    const mapPath = `/maps/${this.options.mapId}`;
    if (method === "GET" && path === mapPath) {
      return jsonResponse(200, {
        map_id: this.options.mapId,
        revision: this.revision,
        map: this.document,
        result: this.result,
      });
    }
    if (method === "POST" && path === `${mapPath}/whatif`) {
      try {
        return jsonResponse(200, this.lookupWhatif(body.edits as EditOp[]));
      } catch (error) {
        return jsonResponse(400, {
          code: "bad_request", message: String(error), detail: null,
        });
      }
    }
    if (method === "PATCH" && path === mapPath) {
      if (this.options.failPatchWith409) {
        return jsonResponse(409, {
          code: "conflict",
          message: "revision mismatch",
          detail: { current_revision: this.revision },
        });
      }
      const edits = body.edits as EditOp[];
      const result = this.lookupWhatif(edits);
      for (const edit of edits) {
        if (edit.op === "set_weight") {
          const edge = this.document.edges.find((e) => e.id === edit.edge);
          if (edge) edge.weight = edit.weight;
        }
      }
      this.revision += 1;
      this.result = result;
      return jsonResponse(200, {
        map_id: this.options.mapId,
        revision: this.revision,
        map: this.document,
        result,
      });
    }
    return jsonResponse(404, {
      code: "not_found", message: `no route ${method} ${path}`, detail: null,
    });
  };
}
