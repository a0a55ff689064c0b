// Session controller: owns the loaded map, pending (previewed) edits, and
// the commit/discard lifecycle. Previews go through POST /whatif and never
// touch the persisted map; only an explicit commit PATCHes, carrying the
// expected revision so concurrent editors surface as conflicts.

import { ApiClient, ApiError } from "./api.js";
import type {
  EditOp,
  InferenceResultJson,
  MapDocument,
  MapEdge,
  MapNode,
} from "./types.js";
import { buildViewModel, type ViewModel } from "./viewmodel.js";

export interface ControllerState {
  mapId: string;
  revision: number;
  committedDoc: MapDocument | null;
  workingDoc: MapDocument | null;
  result: InferenceResultJson | null;
  pendingEdits: EditOp[];
  previewing: boolean;
  message: string | null;
}

// Display-only edit application: the document shown during a preview must
// reflect the pending edits, but every verdict/mass comes from the service.
export function applyEditsToDocument(doc: MapDocument, edits: EditOp[]): MapDocument {
  const out: MapDocument = JSON.parse(JSON.stringify(doc));
  for (const edit of edits) {
    switch (edit.op) {
      case "set_weight": {
        const edge = out.edges.find((e) => e.id === edit.edge);
        if (edge) edge.weight = edit.weight;
        break;
      }
      case "remove_edge":
        out.edges = out.edges.filter((e) => e.id !== edit.edge);
        break;
      case "add_edge": {
        const spec = edit.spec;
        const flavor = spec.kind === "influence" ? spec.polarity : spec.effect;
        const prefix = spec.kind === "influence" ? "inf" : "trg";
        out.edges.push({
          id: spec.id ?? `${prefix}:${spec.source}->${spec.target}:${flavor}`,
          source: spec.source,
          target: spec.target,
          kind: spec.kind as MapEdge["kind"],
          polarity: spec.polarity,
          effect: spec.effect,
          weight: spec.weight ?? 0.5,
          evidence: spec.evidence ?? [],
        });
        break;
      }
      case "add_node": {
        const spec = edit.spec;
        out.nodes.push({
          id: spec.id ?? spec.label.trim().toLowerCase().replace(/\s+/g, " "),
          label: spec.label,
          kind: spec.kind as MapNode["kind"],
          type: spec.type,
        });
        break;
      }
      case "remove_node": {
        const nodeId = edit.node;
        out.nodes = out.nodes.filter((n) => n.id !== nodeId);
        out.edges = out.edges.filter(
          (e) => e.source !== nodeId && e.target !== nodeId,
        );
        out.mutexes = out.mutexes
          .map((m) => m.filter((member) => member !== nodeId))
          .filter((m) => m.length >= 2);
        if (out.scenario) {
          out.scenario.assumptions = out.scenario.assumptions.filter(
            (a) => a.node !== nodeId,
          );
        }
        break;
      }
      case "clamp": {
        if (!out.scenario) {
          out.scenario = { assumptions: [], target: null };
        }
        out.scenario.assumptions = out.scenario.assumptions
          .filter((a) => a.node !== edit.node)
          .concat([{ node: edit.node, value: edit.value }]);
        break;
      }
      case "unclamp": {
        if (out.scenario) {
          out.scenario.assumptions = out.scenario.assumptions.filter(
            (a) => a.node !== edit.node,
          );
        }
        break;
      }
    }
  }
  return out;
}

export class MapController {
  readonly state: ControllerState;
  private listeners: ((state: ControllerState) => void)[] = [];

  constructor(private readonly api: ApiClient, mapId: string) {
    this.state = {
      mapId,
      revision: 0,
      committedDoc: null,
      workingDoc: null,
      result: null,
      pendingEdits: [],
      previewing: false,
      message: null,
    };
  }

  onChange(listener: (state: ControllerState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  viewModel(): ViewModel | null {
    if (!this.state.workingDoc) return null;
    return buildViewModel(this.state.workingDoc, this.state.result);
  }

  async load(): Promise<void> {
    const response = await this.api.getMap(this.state.mapId);
    this.state.revision = response.revision;
    this.state.committedDoc = response.map;
    this.state.workingDoc = response.map;
    this.state.result = response.result;
    this.state.pendingEdits = [];
    this.state.previewing = false;
    this.state.message = null;
    this.notify();
  }

  /** Preview the committed map plus pending edits plus `edits` via /whatif. */
  async preview(edits: EditOp[]): Promise<void> {
    if (!this.state.committedDoc) throw new Error("map not loaded");
    const combined = [...this.state.pendingEdits, ...edits];
    try {
      const result = await this.api.whatif(this.state.mapId, combined);
      this.state.pendingEdits = combined;
      this.state.workingDoc = applyEditsToDocument(this.state.committedDoc, combined);
      this.state.result = result;
      this.state.previewing = combined.length > 0;
      this.state.message = null;
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.message = `${error.code}: ${error.message}`;
      } else {
        throw error;
      }
    }
    this.notify();
  }

  /** Replace the pending value of a single-edge weight preview. */
  async previewWeight(edgeId: string, weight: number): Promise<void> {
    if (!this.state.committedDoc) throw new Error("map not loaded");
    const kept = this.state.pendingEdits.filter(
      (e) => !(e.op === "set_weight" && e.edge === edgeId),
    );
    const combined: EditOp[] = [...kept, { op: "set_weight", edge: edgeId, weight }];
    try {
      const result = await this.api.whatif(this.state.mapId, combined);
      this.state.pendingEdits = combined;
      this.state.workingDoc = applyEditsToDocument(this.state.committedDoc, combined);
      this.state.result = result;
      this.state.previewing = true;
      this.state.message = null;
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.message = `${error.code}: ${error.message}`;
      } else {
        throw error;
      }
    }
    this.notify();
  }

  async discard(): Promise<void> {
    await this.load();
  }

  /** Commit pending edits with optimistic concurrency; on conflict, refetch. */
  async commit(): Promise<boolean> {
    if (!this.state.pendingEdits.length) {
      this.state.message = "nothing to commit";
      this.notify();
      return false;
    }
    try {
      const response = await this.api.patch(
        this.state.mapId,
        this.state.pendingEdits,
        this.state.revision,
      );
      this.state.revision = response.revision;
      this.state.committedDoc = response.map;
      this.state.workingDoc = response.map;
      this.state.result = response.result;
      this.state.pendingEdits = [];
      this.state.previewing = false;
      this.state.message = `committed revision ${response.revision}`;
      this.notify();
      return true;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.state.message =
          "conflict: the map changed in another session; reloaded latest";
        await this.load();
        this.state.message =
          "conflict: the map changed in another session; reloaded latest";
        this.notify();
        return false;
      }
      if (error instanceof ApiError) {
        this.state.message = `${error.code}: ${error.message}`;
        this.notify();
        return false;
      }
      throw error;
    }
  }

  /** Incident-edge count used by the delete confirmation dialog. */
  incidentEdgeCount(nodeId: string): number {
    const doc = this.state.workingDoc;
    if (!doc) return 0;
    return doc.edges.filter((e) => e.source === nodeId || e.target === nodeId).length;
  }
}
