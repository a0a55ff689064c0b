// Wire types mirroring the service's MapDocument / InferenceResult schemas.

export interface EvidenceItem {
  doc_id: string;
  passage: string;
}

export interface MapNode {
  id: string;
  label: string;
  kind: "quantity" | "state";
  type?: string;
  linked_quantity?: string;
}

export interface MapEdge {
  id: string;
  source: string;
  target: string;
  kind: "influence" | "trigger";
  polarity?: "direct" | "inverse";
  effect?: "activate" | "increase" | "decrease";
  weight: number;
  evidence: EvidenceItem[];
  template_derived?: boolean;
}

export interface ScenarioJson {
  assumptions: { node: string; value: string }[];
  target: string | null;
}

export interface MapDocument {
  version: number;
  nodes: MapNode[];
  edges: MapEdge[];
  mutexes: string[][];
  scenario: ScenarioJson | null;
  provenance: Record<string, unknown>;
}

export interface ProofPathJson {
  source: string;
  hops: string[];
  sign: "+" | "-";
  strength: number;
  evidence: EvidenceItem[];
}

export interface ContradictionJson {
  members: string[];
  derivations: { node: string; chains: string[][] }[];
}

export interface InferenceResultJson {
  verdict: { direction: string; U: number; D: number; tau: number };
  paths: ProofPathJson[];
  contradictions: ContradictionJson[];
  explanation: string;
  notes: string[];
  provenance: Record<string, unknown>;
}

export interface MapResponse {
  map_id: string;
  revision: number;
  map: MapDocument;
  result: InferenceResultJson | null;
}

export interface PatchResponse extends MapResponse {}

export type EditOp =
  | { op: "set_weight"; edge: string; weight: number }
  | { op: "remove_edge"; edge: string }
  | { op: "add_edge"; spec: Partial<MapEdge> & { source: string; target: string; kind: string } }
  | { op: "add_node"; spec: { label: string; kind: string; id?: string; type?: string } }
  | { op: "remove_node"; node: string }
  | { op: "clamp"; node: string; value: string }
  | { op: "unclamp"; node: string };

export interface ErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
