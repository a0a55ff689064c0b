// Pure presentation model derived from a MapDocument plus the service's
// InferenceResult. Verdicts and masses are displayed exactly as the service
// reported them; this module only regroups them for rendering.
//
// Color convention: edges on upward-pressure proof paths are blue, edges on
// downward-pressure paths are red, edges on both are drawn as a dashed
// dual-color pair. Dashing doubles as the color-blind-safe channel.

import type {
  InferenceResultJson,
  MapDocument,
  MapEdge,
  MapNode,
  ProofPathJson,
} from "./types.js";

export type Pressure = "upward" | "downward" | "both" | "none";
export type NodeDirection = "increasing" | "decreasing" | "mixed" | "none";

export const UPWARD_COLOR = "#2563eb"; // blue
export const DOWNWARD_COLOR = "#dc2626"; // red
export const NEUTRAL_COLOR = "#9ca3af";

export interface EdgeView {
  edge: MapEdge;
  pressure: Pressure;
  color: string;
  dashed: boolean;
  sourceLabel: string;
  targetLabel: string;
}

export interface NodeView {
  node: MapNode;
  direction: NodeDirection;
  color: string;
  isTarget: boolean;
  isAssumed: boolean;
  assumedValue: string | null;
  activeState: boolean;
  mutexViolated: boolean;
}

export interface PathView {
  sign: "+" | "-";
  strength: number;
  labelChain: string;
  hops: string[];
  docIds: string[];
}

export interface BannerView {
  text: string;
  direction: string;
  upwardMass: number;
  downwardMass: number;
}

export interface ViewModel {
  nodes: NodeView[];
  edges: EdgeView[];
  banner: BannerView | null;
  contradictionNotices: string[];
  upwardPaths: PathView[];
  downwardPaths: PathView[];
  notes: string[];
  explanation: string;
  emptyNotice: string | null;
}

function labelOf(doc: MapDocument, nodeId: string): string {
  const node = doc.nodes.find((n) => n.id === nodeId);
  return node ? node.label : nodeId;
}

function pathNodeSequence(doc: MapDocument, path: ProofPathJson): string[] {
  const byId = new Map(doc.edges.map((e) => [e.id, e]));
  const sequence: string[] = [path.source];
  for (const hop of path.hops) {
    const edge = byId.get(hop);
    if (edge) {
      sequence.push(edge.target);
    }
  }
  return sequence;
}

function directionColor(direction: NodeDirection): string {
  switch (direction) {
    case "increasing":
      return UPWARD_COLOR;
    case "decreasing":
      return DOWNWARD_COLOR;
    case "mixed":
      return "#7c3aed";
    case "none":
      return NEUTRAL_COLOR;
  }
}

export function buildViewModel(
  doc: MapDocument,
  result: InferenceResultJson | null,
): ViewModel {
  const edgeById = new Map(doc.edges.map((e) => [e.id, e]));
  const upwardEdges = new Set<string>();
  const downwardEdges = new Set<string>();
  const nodeUp = new Set<string>();
  const nodeDown = new Set<string>();
  const activeStates = new Set<string>();
  const stateIds = new Set(doc.nodes.filter((n) => n.kind === "state").map((n) => n.id));

  const assumptions = new Map<string, string>();
  const target = doc.scenario?.target ?? null;
  for (const assumption of doc.scenario?.assumptions ?? []) {
    assumptions.set(assumption.node, assumption.value);
    if (assumption.value === "active") {
      activeStates.add(assumption.node);
    }
  }

  for (const path of result?.paths ?? []) {
    const bucket = path.sign === "+" ? upwardEdges : downwardEdges;
    for (const hop of path.hops) {
      bucket.add(hop);
    }
    // walk the hop chain to tag node directions with the running sign
    let sign = path.sign === "+" ? 1 : -1;
    // the final sign is the product over the whole path; recover per-node
    // signs by walking backwards from the target
    const sequence = pathNodeSequence(doc, path);
    const signsAt: number[] = new Array(sequence.length).fill(0);
    signsAt[sequence.length - 1] = sign;
    for (let i = path.hops.length - 1; i >= 0; i--) {
      const edge = edgeById.get(path.hops[i]);
      const flips = edge?.kind === "influence" && edge.polarity === "inverse";
      sign = flips ? -sign : sign;
      signsAt[i] = sign;
    }
    sequence.forEach((nodeId, index) => {
      if (stateIds.has(nodeId)) {
        activeStates.add(nodeId);
        return;
      }
      (signsAt[index] > 0 ? nodeUp : nodeDown).add(nodeId);
    });
  }

  const mutexViolated = new Set<string>();
  const contradictionNotices: string[] = [];
  for (const contradiction of result?.contradictions ?? []) {
    for (const member of contradiction.members) {
      mutexViolated.add(member);
      activeStates.add(member);
    }
    const labels = contradiction.members.map((m) => labelOf(doc, m)).join(", ");
    contradictionNotices.push(
      `Contradiction: ${labels} are mutually exclusive but simultaneously active.`,
    );
  }

  const edges: EdgeView[] = doc.edges.map((edge) => {
    const up = upwardEdges.has(edge.id);
    const down = downwardEdges.has(edge.id);
    const pressure: Pressure = up && down ? "both" : up ? "upward" : down ? "downward" : "none";
    return {
      edge,
      pressure,
      color: pressure === "upward" ? UPWARD_COLOR
        : pressure === "downward" ? DOWNWARD_COLOR
        : pressure === "both" ? UPWARD_COLOR
        : NEUTRAL_COLOR,
      dashed: pressure === "both",
      sourceLabel: labelOf(doc, edge.source),
      targetLabel: labelOf(doc, edge.target),
    };
  });

  const verdictDirection = result?.verdict.direction ?? null;
  const nodes: NodeView[] = doc.nodes.map((node) => {
    let direction: NodeDirection = "none";
    const assumed = assumptions.get(node.id) ?? null;
    if (node.id === target && verdictDirection) {
      direction = verdictDirection === "increasing" ? "increasing"
        : verdictDirection === "decreasing" ? "decreasing"
        : verdictDirection === "ambiguous" ? "mixed"
        : "none";
    } else if (assumed === "increasing" || assumed === "decreasing") {
      direction = assumed;
    } else if (nodeUp.has(node.id) && nodeDown.has(node.id)) {
      direction = "mixed";
    } else if (nodeUp.has(node.id)) {
      direction = "increasing";
    } else if (nodeDown.has(node.id)) {
      direction = "decreasing";
    }
    return {
      node,
      direction,
      color: directionColor(direction),
      isTarget: node.id === target,
      isAssumed: assumed !== null,
      assumedValue: assumed,
      activeState: node.kind === "state" && activeStates.has(node.id),
      mutexViolated: mutexViolated.has(node.id),
    };
  });

  const toPathView = (path: ProofPathJson): PathView => ({
    sign: path.sign,
    strength: path.strength,
    labelChain: pathNodeSequence(doc, path)
      .map((nodeId) => labelOf(doc, nodeId))
      .join(" → "),
    hops: path.hops,
    docIds: [...new Set(path.evidence.map((e) => e.doc_id).filter(Boolean))],
  });

  const upwardPaths = (result?.paths ?? []).filter((p) => p.sign === "+").map(toPathView);
  const downwardPaths = (result?.paths ?? []).filter((p) => p.sign === "-").map(toPathView);

  let banner: BannerView | null = null;
  if (result && target) {
    banner = {
      direction: result.verdict.direction,
      upwardMass: result.verdict.U,
      downwardMass: result.verdict.D,
      text: `'${labelOf(doc, target)}' is ${result.verdict.direction}`,
    };
  }

  return {
    nodes,
    edges,
    banner,
    contradictionNotices,
    upwardPaths,
    downwardPaths,
    notes: result?.notes ?? [],
    explanation: result?.explanation ?? "",
    emptyNotice: doc.nodes.length === 0 ? "no nodes" : null,
  };
}
