"""Scenario-relevant causal map construction from a knowledge base.

The builder maps event predicates to influence/trigger edges through a
lexicon, merges same-kind events between a concept pair into one weighted,
evidence-bearing edge, then runs a bidirectional best-first search (forward
from the sources, backward from the target, priority g + h with
g = sum of -ln(edge weight) and h a pluggable label-similarity heuristic).
Frontiers meet on shared nodes; every assembled simple path within the hop
bound is kept, so at desk scale the result set equals exhaustive
enumeration.  Retention then applies per-source top-K (ties within 1e-6
prefer the longer path) and drops paths whose node sequence is a strict
subsequence of a longer retained path for the same source.

Opposite-polarity evidence between the same pair stays as two parallel
edges so refuting pressure survives into inference.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Protocol

from .kb import EventRecord, KnowledgeBase, TypeHierarchy
from .model import (
    ACTIVATE,
    DECREASE,
    DIRECT,
    INCREASE,
    INVERSE,
    Assumption,
    CausalModel,
    Evidence,
    Influence,
    MutexConstraint,
    Quantity,
    Scenario,
    State,
    Trigger,
    influence_id,
    to_json,
    trigger_id,
    validate,
)
from .util import normalize_label

STRENGTH_TIE_EPS = 1e-6
WEIGHT_FLOOR = 0.1
WEIGHT_CAP = 0.99


class BuildError(Exception):
    """Unresolvable concepts, bad bindings, or an unusable lexicon."""


# ---------------------------------------------------------------------------
# Lexicon

DEFAULT_LEXICON: dict[str, dict] = {
    # direct influences
    "increases": {"kind": "influence", "polarity": "direct"},
    "raises": {"kind": "influence", "polarity": "direct"},
    "boosts": {"kind": "influence", "polarity": "direct"},
    "promotes": {"kind": "influence", "polarity": "direct"},
    "activates": {"kind": "influence", "polarity": "direct"},
    "up-regulates": {"kind": "influence", "polarity": "direct"},
    "amplifies": {"kind": "influence", "polarity": "direct"},
    "elevates": {"kind": "influence", "polarity": "direct"},
    "strengthens": {"kind": "influence", "polarity": "direct"},
    "stimulates": {"kind": "influence", "polarity": "direct"},
    "accelerates": {"kind": "influence", "polarity": "direct"},
    "expands": {"kind": "influence", "polarity": "direct"},
    "fuels": {"kind": "influence", "polarity": "direct"},
    "supports": {"kind": "influence", "polarity": "direct"},
    # inverse influences
    "decreases": {"kind": "influence", "polarity": "inverse"},
    "reduces": {"kind": "influence", "polarity": "inverse"},
    "lowers": {"kind": "influence", "polarity": "inverse"},
    "inhibits": {"kind": "influence", "polarity": "inverse"},
    "suppresses": {"kind": "influence", "polarity": "inverse"},
    "down-regulates": {"kind": "influence", "polarity": "inverse"},
    "dampens": {"kind": "influence", "polarity": "inverse"},
    "weakens": {"kind": "influence", "polarity": "inverse"},
    "curbs": {"kind": "influence", "polarity": "inverse"},
    "undermines": {"kind": "influence", "polarity": "inverse"},
    "erodes": {"kind": "influence", "polarity": "inverse"},
    "depresses": {"kind": "influence", "polarity": "inverse"},
    # state-to-state triggers
    "causes": {"kind": "trigger", "effect": "activate"},
    "leads to": {"kind": "trigger", "effect": "activate"},
    "triggers": {"kind": "trigger", "effect": "activate"},
    "results in": {"kind": "trigger", "effect": "activate"},
    "induces": {"kind": "trigger", "effect": "activate"},
    "precipitates": {"kind": "trigger", "effect": "activate"},
    # state-to-quantity triggers
    "pushes up": {"kind": "trigger", "effect": "increase"},
    "forces up": {"kind": "trigger", "effect": "increase"},
    "pushes down": {"kind": "trigger", "effect": "decrease"},
    "forces down": {"kind": "trigger", "effect": "decrease"},
}


@dataclass(frozen=True)
class EdgeSpec:
    kind: str  # influence | trigger
    polarity: str | None = None
    effect: str | None = None

    @property
    def flavor(self) -> str:
        return self.polarity if self.kind == "influence" else self.effect  # type: ignore[return-value]


class Lexicon:
    """Predicate label -> edge mapping, case-folded lookup."""

    def __init__(self, entries: dict[str, dict] | None = None):
        self.entries: dict[str, EdgeSpec] = {}
        for predicate, raw in (entries if entries is not None else DEFAULT_LEXICON).items():
            kind = raw.get("kind")
            if kind == "influence":
                polarity = raw.get("polarity")
                if polarity not in (DIRECT, INVERSE):
                    raise BuildError(
                        f"lexicon entry '{predicate}': bad polarity {polarity!r}"
                    )
                spec = EdgeSpec("influence", polarity=polarity)
            elif kind == "trigger":
                effect = raw.get("effect")
                if effect not in (ACTIVATE, INCREASE, DECREASE):
                    raise BuildError(
                        f"lexicon entry '{predicate}': bad effect {effect!r}"
                    )
                spec = EdgeSpec("trigger", effect=effect)
            else:
                raise BuildError(f"lexicon entry '{predicate}': bad kind {kind!r}")
            self.entries[normalize_label(predicate)] = spec

    def lookup(self, predicate: str) -> EdgeSpec | None:
        return self.entries.get(normalize_label(predicate))

    def snapshot(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for predicate, spec in sorted(self.entries.items()):
            if spec.kind == "influence":
                out[predicate] = {"kind": "influence", "polarity": spec.polarity}
            else:
                out[predicate] = {"kind": "trigger", "effect": spec.effect}
        return out


def map_predicate(event: EventRecord, lexicon: Lexicon) -> EdgeSpec | None:
    """Deterministic lookup; unmapped predicates return None, never a guess."""
    return lexicon.lookup(event.predicate)


def evidence_weight(confidences: list[float]) -> float:
    """Combine supporting-event confidences into an edge weight.

    Repeated independent evidence strengthens the link: with n events of
    mean confidence c, the weight is 1 - (1-c)^n, capped to [0.1, 0.99].
    """
    n = len(confidences)
    mean = sum(confidences) / n
    raw = 1.0 - (1.0 - mean) ** n
    return min(max(raw, WEIGHT_FLOOR), WEIGHT_CAP)


# ---------------------------------------------------------------------------
# Heuristics

class Heuristic(Protocol):
    def estimate(self, a: str, b: str) -> float:
        """Distance-like closeness of two concept labels; 0 means identical."""
        ...


class NullHeuristic:
    """Degrades the search to uniform cost; final path sets are unchanged."""

    def estimate(self, a: str, b: str) -> float:
        return 0.0


class TrigramHeuristic:
    """1 - Jaccard similarity of character trigrams; symmetric, zero on self."""

    def estimate(self, a: str, b: str) -> float:
        ta, tb = _trigrams(a), _trigrams(b)
        if not ta and not tb:
            return 0.0
        union = len(ta | tb)
        if union == 0:
            return 0.0
        return 1.0 - len(ta & tb) / union


def _trigrams(label: str) -> frozenset[str]:
    text = normalize_label(label)
    if len(text) < 3:
        return frozenset([text]) if text else frozenset()
    return frozenset(text[i : i + 3] for i in range(len(text) - 2))


HEURISTICS: dict[str, type] = {
    "trigram": TrigramHeuristic,
    "null": NullHeuristic,
}


def make_heuristic(name: str) -> Heuristic:
    cls = HEURISTICS.get(name)
    if cls is None:
        raise BuildError(f"unknown heuristic '{name}' (have: {sorted(HEURISTICS)})")
    return cls()


# ---------------------------------------------------------------------------
# Search

@dataclass(frozen=True)
class SearchParams:
    max_hops: int = 6
    beam_width: int | None = None
    top_k: int | None = None
    heuristic: str = "trigram"
    min_confidence: float = 0.0

    def check(self) -> None:
        if self.max_hops < 1:
            raise BuildError(f"max_hops must be >= 1, got {self.max_hops}")
        if self.beam_width is not None and self.beam_width < 1:
            raise BuildError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.top_k is not None and self.top_k < 1:
            raise BuildError(f"top_k must be >= 1, got {self.top_k}")
        if self.min_confidence < 0:
            raise BuildError(f"min_confidence must be >= 0, got {self.min_confidence}")


@dataclass
class BuildDiagnostics:
    events_total: int = 0
    events_below_confidence: int = 0
    unmapped_predicates: dict[str, int] = field(default_factory=dict)
    kind_conflicts: int = 0
    merged_edges: int = 0
    paths_found: int = 0
    paths_retained: int = 0
    notes: list[str] = field(default_factory=list)
    retained_paths: list[list[str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "events_total": self.events_total,
            "events_below_confidence": self.events_below_confidence,
            "unmapped_predicates": dict(sorted(self.unmapped_predicates.items())),
            "kind_conflicts": self.kind_conflicts,
            "merged_edges": self.merged_edges,
            "paths_found": self.paths_found,
            "paths_retained": self.paths_retained,
            "notes": list(self.notes),
            "retained_paths": [list(p) for p in self.retained_paths],
        }


@dataclass
class BuildResult:
    model: CausalModel
    diagnostics: BuildDiagnostics


@dataclass(frozen=True)
class _BuiltEdge:
    edge_id: str
    source: str
    target: str
    kind: str
    flavor: str  # polarity for influences, effect for triggers
    weight: float
    evidence: tuple[Evidence, ...]


def assemble_edges(
    kb: KnowledgeBase, lexicon: Lexicon, min_confidence: float,
    diagnostics: BuildDiagnostics | None = None,
) -> tuple[dict[str, _BuiltEdge], dict[str, str]]:
    """Merge mapped events into weighted edges and resolve node kinds.

    Node kinds are assigned greedily over content-sorted edges: influence
    endpoints demand quantities; trigger sources demand states; trigger
    targets demand states (activate) or quantities (increase/decrease).
    An edge whose demands conflict with earlier assignments is dropped.
    """
    diag = diagnostics or BuildDiagnostics()
    support: dict[tuple[str, str, str, str], list[EventRecord]] = {}
    for event_id in sorted(kb.events):
        event = kb.events[event_id]
        diag.events_total += 1
        if event.confidence < min_confidence:
            diag.events_below_confidence += 1
            continue
        spec = map_predicate(event, lexicon)
        if spec is None:
            key = normalize_label(event.predicate)
            diag.unmapped_predicates[key] = diag.unmapped_predicates.get(key, 0) + 1
            continue
        source = kb.resolve(event.subject, create_if_missing=True)
        target = kb.resolve(event.object, create_if_missing=True)
        support.setdefault((source, target, spec.kind, spec.flavor), []).append(event)

    kinds: dict[str, str] = {}

    def demand(node: str, kind: str) -> bool:
        existing = kinds.get(node)
        if existing is None:
            kinds[node] = kind
            return True
        return existing == kind

    edges: dict[str, _BuiltEdge] = {}
    for key in sorted(support):
        source, target, kind, flavor = key
        if kind == "influence":
            wanted = [(source, "quantity"), (target, "quantity")]
        elif flavor == ACTIVATE:
            wanted = [(source, "state"), (target, "state")]
        else:
            wanted = [(source, "state"), (target, "quantity")]
        snapshot = dict(kinds)
        if not all(demand(node, k) for node, k in wanted):
            kinds.clear()
            kinds.update(snapshot)
            diag.kind_conflicts += 1
            continue
        events = support[key]
        weight = evidence_weight([e.confidence for e in events])
        evidence = tuple(
            Evidence(e.doc_id, e.passage) for e in sorted(events, key=lambda e: e.event_id)
        )
        if kind == "influence":
            edge_id = influence_id(source, target, flavor)
        else:
            edge_id = trigger_id(source, target, flavor)
        edges[edge_id] = _BuiltEdge(edge_id, source, target, kind, flavor, weight, evidence)
    diag.merged_edges = len(edges)
    return edges, kinds


@dataclass(frozen=True)
class _Partial:
    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    cost: float


def _edge_cost(weight: float) -> float:
    return -math.log(weight)


def _expand_frontier(
    heap: list,
    counter: list[int],
    partial: _Partial,
    adjacency: dict[str, list[_BuiltEdge]],
    hop_limit: int,
    forward: bool,
    by_node: dict[str, list[_Partial]],
    opposite_nodes: set[str],
    heuristic: Heuristic,
    beam_width: int | None,
    depth_counts: dict[int, int],
) -> None:
    if len(partial.edges) >= hop_limit:
        return
    depth = len(partial.edges) + 1
    frontier_node = partial.nodes[-1] if forward else partial.nodes[0]
    for edge in adjacency.get(frontier_node, ()):
        nxt = edge.target if forward else edge.source
        if nxt in partial.nodes:
            continue
        if beam_width is not None:
            if depth_counts.get(depth, 0) >= beam_width:
                return
            depth_counts[depth] = depth_counts.get(depth, 0) + 1
        if forward:
            new = _Partial(
                partial.nodes + (nxt,), partial.edges + (edge.edge_id,),
                partial.cost + _edge_cost(edge.weight),
            )
            anchor = new.nodes[-1]
        else:
            new = _Partial(
                (nxt,) + partial.nodes, (edge.edge_id,) + partial.edges,
                partial.cost + _edge_cost(edge.weight),
            )
            anchor = new.nodes[0]
        by_node.setdefault(anchor, []).append(new)
        h = min(
            (heuristic.estimate(anchor, other) for other in opposite_nodes),
            default=0.0,
        )
        counter[0] += 1
        heapq.heappush(heap, (new.cost + h, counter[0], forward, new))


def find_paths(
    edges: dict[str, _BuiltEdge],
    sources: list[str],
    target: str,
    params: SearchParams,
    heuristic: Heuristic,
) -> list[tuple[str, ...]]:
    """All simple source->target paths within max_hops, as edge-id tuples.

    Bidirectional: the forward frontier reaches ceil(L/2) hops and the
    backward frontier floor(L/2), so every path of length <= L is split at
    some shared node and assembled at the meet.
    """
    fwd_adj: dict[str, list[_BuiltEdge]] = {}
    bwd_adj: dict[str, list[_BuiltEdge]] = {}
    for edge in sorted(edges.values(), key=lambda e: e.edge_id):
        fwd_adj.setdefault(edge.source, []).append(edge)
        bwd_adj.setdefault(edge.target, []).append(edge)

    fwd_limit = (params.max_hops + 1) // 2
    bwd_limit = params.max_hops // 2

    starts = sorted(set(s for s in sources if s != target))
    fwd_by_node: dict[str, list[_Partial]] = {}
    bwd_by_node: dict[str, list[_Partial]] = {}
    fwd_heap: list = []
    bwd_heap: list = []
    counter = [0]
    fwd_depths: dict[int, int] = {}
    bwd_depths: dict[int, int] = {}

    for start in starts:
        partial = _Partial((start,), (), 0.0)
        fwd_by_node.setdefault(start, []).append(partial)
        counter[0] += 1
        heapq.heappush(fwd_heap, (0.0, counter[0], True, partial))
    target_partial = _Partial((target,), (), 0.0)
    bwd_by_node.setdefault(target, []).append(target_partial)
    counter[0] += 1
    heapq.heappush(bwd_heap, (0.0, counter[0], False, target_partial))

    while fwd_heap or bwd_heap:
        if fwd_heap and (not bwd_heap or fwd_heap[0][0] <= bwd_heap[0][0]):
            _, _, _, partial = heapq.heappop(fwd_heap)
            _expand_frontier(
                fwd_heap, counter, partial, fwd_adj, fwd_limit, True,
                fwd_by_node, set(bwd_by_node), heuristic,
                params.beam_width, fwd_depths,
            )
        else:
            _, _, _, partial = heapq.heappop(bwd_heap)
            _expand_frontier(
                bwd_heap, counter, partial, bwd_adj, bwd_limit, False,
                bwd_by_node, set(fwd_by_node), heuristic,
                params.beam_width, bwd_depths,
            )

    paths: set[tuple[str, ...]] = set()
    for meet in sorted(set(fwd_by_node) & set(bwd_by_node)):
        for head in fwd_by_node[meet]:
            for tail in bwd_by_node[meet]:
                total = len(head.edges) + len(tail.edges)
                if total == 0 or total > params.max_hops:
                    continue
                if tail.nodes[-1] != target:
                    continue
                overlap = set(head.nodes) & set(tail.nodes)
                if overlap != {meet}:
                    continue
                paths.add(head.edges + tail.edges)
    return sorted(paths)


def _path_strength(path: tuple[str, ...], edges: dict[str, _BuiltEdge]) -> float:
    strength = 1.0
    for edge_id in path:
        strength *= edges[edge_id].weight
    return strength


def _path_nodes(path: tuple[str, ...], edges: dict[str, _BuiltEdge]) -> tuple[str, ...]:
    first = edges[path[0]]
    nodes = [first.source]
    for edge_id in path:
        nodes.append(edges[edge_id].target)
    return tuple(nodes)


def _is_strict_subsequence(shorter: tuple[str, ...], longer: tuple[str, ...]) -> bool:
    if len(shorter) >= len(longer):
        return False
    it = iter(longer)
    return all(item in it for item in shorter)


def retain_paths(
    paths: list[tuple[str, ...]],
    edges: dict[str, _BuiltEdge],
    top_k: int | None,
) -> list[tuple[str, ...]]:
    """Per-source top-K by strength with tie-prefers-longer, then drop
    paths whose node sequence is a strict subsequence of a retained
    longer path from the same source."""
    by_source: dict[str, list[tuple[str, ...]]] = {}
    for path in paths:
        by_source.setdefault(edges[path[0]].source, []).append(path)

    def compare(p: tuple[str, ...], q: tuple[str, ...]) -> int:
        sp, sq = _path_strength(p, edges), _path_strength(q, edges)
        if abs(sp - sq) <= STRENGTH_TIE_EPS:
            if len(p) != len(q):
                return -1 if len(p) > len(q) else 1
            return -1 if p < q else (1 if p > q else 0)
        return -1 if sp > sq else 1

    retained: list[tuple[str, ...]] = []
    for source in sorted(by_source):
        group = sorted(by_source[source])
        group.sort(key=cmp_to_key(compare))
        if top_k is not None:
            group = group[:top_k]
        node_seqs = {p: _path_nodes(p, edges) for p in group}
        survivors = [
            p for p in group
            if not any(
                q is not p and _is_strict_subsequence(node_seqs[p], node_seqs[q])
                for q in group
            )
        ]
        retained.extend(survivors)
    return retained


# ---------------------------------------------------------------------------
# Map assembly

def _normalize_sources(
    raw_sources: list, kb: KnowledgeBase
) -> list[tuple[str, str | None]]:
    out: list[tuple[str, str | None]] = []
    seen: dict[str, str | None] = {}
    for item in raw_sources:
        if isinstance(item, str):
            label, value = item, None
        elif isinstance(item, (tuple, list)) and len(item) == 2:
            label, value = item
        elif isinstance(item, dict):
            label = item.get("concept") or item.get("label")
            value = item.get("value")
        else:
            raise BuildError(f"bad source spec: {item!r}")
        if not isinstance(label, str) or not label.strip():
            raise BuildError(f"bad source spec: {item!r}")
        if value is not None and value not in ("active", "increasing", "decreasing", "steady"):
            raise BuildError(f"bad source value {value!r} for '{label}'")
        concept = kb.resolve(label)
        if concept is None:
            raise BuildError(f"cannot resolve source concept '{label}'")
        if concept in seen:
            if seen[concept] != value and value is not None and seen[concept] is not None:
                raise BuildError(f"conflicting values for source '{concept}'")
            seen[concept] = seen[concept] or value
            continue
        seen[concept] = value
        out.append((concept, value))
    return [(concept, seen[concept]) for concept, _ in out]


def build_map(
    kb: KnowledgeBase,
    sources: list,
    target: str,
    lexicon: Lexicon | None = None,
    params: SearchParams | None = None,
) -> BuildResult:
    """Build an evidence-backed CausalModel connecting sources to the target."""
    params = params or SearchParams()
    params.check()
    if lexicon is None:
        lexicon = Lexicon(kb.lexicon_data) if kb.lexicon_data else Lexicon()
    target_id = kb.resolve(target)
    if target_id is None:
        raise BuildError(f"cannot resolve target concept '{target}'")
    source_specs = _normalize_sources(sources, kb)

    diagnostics = BuildDiagnostics()
    edges, kinds = assemble_edges(kb, lexicon, params.min_confidence, diagnostics)
    heuristic = make_heuristic(params.heuristic)

    source_ids = []
    for concept, _ in source_specs:
        if concept == target_id:
            diagnostics.notes.append(f"source equals target: '{concept}'")
        else:
            source_ids.append(concept)

    paths = find_paths(edges, source_ids, target_id, params, heuristic)
    diagnostics.paths_found = len(paths)
    retained = retain_paths(paths, edges, params.top_k)
    diagnostics.paths_retained = len(retained)
    diagnostics.retained_paths = [list(p) for p in sorted(retained)]

    used_edges: dict[str, _BuiltEdge] = {}
    node_ids: set[str] = {target_id} | {c for c, _ in source_specs}
    for path in retained:
        for edge_id in path:
            edge = edges[edge_id]
            used_edges[edge_id] = edge
            node_ids.add(edge.source)
            node_ids.add(edge.target)

    def node_kind(node: str) -> str:
        return kinds.get(node, "quantity")

    def node_type(node: str) -> str | None:
        types = kb.types_of(node)
        return min(types) if types else None

    quantities = []
    states = []
    for node in sorted(node_ids):
        if node_kind(node) == "state":
            states.append(State(node, node, None, node_type(node)))
        else:
            quantities.append(Quantity(node, node, node_type(node)))

    influences = []
    triggers = []
    for edge in used_edges.values():
        if edge.kind == "influence":
            influences.append(
                Influence(edge.edge_id, edge.source, edge.target, edge.flavor,
                          edge.weight, edge.evidence)
            )
        else:
            triggers.append(
                Trigger(edge.edge_id, edge.source, edge.target, edge.flavor,
                        edge.weight, edge.evidence)
            )

    assumptions = []
    for concept, value in source_specs:
        if concept == target_id:
            continue
        kind = node_kind(concept)
        if value is None:
            value = "active" if kind == "state" else "increasing"
        if kind == "state" and value != "active":
            raise BuildError(
                f"source '{concept}' resolved to a state; value must be 'active'"
            )
        if kind == "quantity" and value == "active":
            raise BuildError(
                f"source '{concept}' resolved to a quantity; give a direction"
            )
        assumptions.append(Assumption(concept, value))

    model = CausalModel(
        quantities=tuple(quantities),
        states=tuple(states),
        influences=tuple(influences),
        triggers=tuple(triggers),
        scenario=Scenario(tuple(assumptions), target_id),
        provenance={
            "builder": {
                "max_hops": params.max_hops,
                "heuristic": params.heuristic,
                "min_confidence": params.min_confidence,
                "top_k": params.top_k,
                "beam_width": params.beam_width,
            },
            "sources": [c for c, _ in source_specs],
            "target": target_id,
        },
    )
    issues = validate(model)
    if issues:
        raise BuildError(
            "built model failed validation: " + "; ".join(str(i) for i in issues[:5])
        )
    return BuildResult(model, diagnostics)


def merge_user_map(
    built: CausalModel, user: CausalModel
) -> tuple[CausalModel, list[str]]:
    """Union a built map with a user-saved map, preferring user edges on conflict.

    Conflicts are edges sharing (source, target, kind, polarity/effect) with
    differing weight or evidence; each one is reported.
    """
    notes: list[str] = []

    def key(edge):
        flavor = edge.polarity if isinstance(edge, Influence) else edge.effect
        return (edge.source, edge.target, type(edge).__name__, flavor)

    user_by_key = {key(e): e for e in list(user.influences) + list(user.triggers)}
    influences: dict = {}
    triggers: dict = {}
    for edge in list(built.influences) + list(built.triggers):
        k = key(edge)
        chosen = edge
        if k in user_by_key:
            user_edge = user_by_key[k]
            if user_edge.weight != edge.weight or user_edge.evidence != edge.evidence:
                notes.append(
                    f"user edge {user_edge.edge_id} overrides built edge {edge.edge_id}"
                )
            chosen = user_edge
        if isinstance(chosen, Influence):
            influences[key(chosen)] = chosen
        else:
            triggers[key(chosen)] = chosen
    for k, edge in user_by_key.items():
        if k not in influences and k not in triggers:
            if isinstance(edge, Influence):
                influences[k] = edge
            else:
                triggers[k] = edge

    nodes: dict[str, Quantity | State] = dict(built.nodes)
    for node_id, node in user.nodes.items():
        nodes.setdefault(node_id, node)
    merged = CausalModel(
        quantities=tuple(n for n in nodes.values() if isinstance(n, Quantity)),
        states=tuple(n for n in nodes.values() if isinstance(n, State)),
        influences=tuple(influences.values()),
        triggers=tuple(triggers.values()),
        mutexes=tuple({m.members: m for m in built.mutexes + user.mutexes}.values()),
        scenario=built.scenario,
        provenance=dict(built.provenance, merged_from_user_map=True),
    )
    return merged, notes


# ---------------------------------------------------------------------------
# Research templates

@dataclass(frozen=True)
class TemplateSlot:
    id: str
    type: str


@dataclass(frozen=True)
class Template:
    model: CausalModel
    slots: tuple[TemplateSlot, ...]

    def to_json(self) -> dict:
        document = to_json(self.model)
        document["slots"] = [{"id": s.id, "type": s.type} for s in self.slots]
        return document


def template_from_json(document: dict) -> Template:
    from .model import from_json  # late import keeps module load light

    raw_slots = document.get("slots", [])
    body = {k: v for k, v in document.items() if k != "slots"}
    slots = tuple(
        TemplateSlot(str(s["id"]), str(s["type"])) for s in raw_slots
    )
    return Template(from_json(body), slots)


def _substitute(model: CausalModel, mapping: dict[str, str],
                relabel: dict[str, str], retype: dict[str, str | None]) -> CausalModel:
    def sub(node_id: str) -> str:
        return mapping.get(node_id, node_id)

    quantities = tuple(
        Quantity(sub(q.id), relabel.get(q.id, q.label), retype.get(q.id, q.concept_type))
        for q in model.quantities
    )
    states = tuple(
        State(
            sub(s.id),
            relabel.get(s.id, s.label),
            sub(s.linked_quantity) if s.linked_quantity else None,
            retype.get(s.id, s.concept_type),
        )
        for s in model.states
    )
    influences = tuple(
        Influence(e.edge_id, sub(e.source), sub(e.target), e.polarity,
                  e.weight, e.evidence, e.template_derived)
        for e in model.influences
    )
    triggers = tuple(
        Trigger(e.edge_id, sub(e.source), sub(e.target), e.effect,
                e.weight, e.evidence, e.template_derived)
        for e in model.triggers
    )
    mutexes = tuple(
        MutexConstraint(tuple(sub(m) for m in mutex.members)) for mutex in model.mutexes
    )
    scenario = None
    if model.scenario is not None:
        scenario = Scenario(
            tuple(Assumption(sub(a.node), a.value) for a in model.scenario.assumptions),
            sub(model.scenario.target) if model.scenario.target else None,
        )
    return CausalModel(
        quantities=quantities,
        states=states,
        influences=influences,
        triggers=triggers,
        mutexes=mutexes,
        scenario=scenario,
        provenance=dict(model.provenance),
    )


def generalize_map(model: CausalModel, types: TypeHierarchy) -> Template:
    """Turn typed nodes that participate in edges into typed slots.

    Untyped or isolated nodes stay concrete so every slot appears in at
    least one edge.  Evidence is stripped: a template is an abstract
    pattern, re-evidenced at instantiation time.
    """
    on_edge: set[str] = set()
    for edge in list(model.influences) + list(model.triggers):
        on_edge.add(edge.source)
        on_edge.add(edge.target)

    mapping: dict[str, str] = {}
    relabel: dict[str, str] = {}
    slots: list[TemplateSlot] = []
    counter = 0
    for node_id in sorted(model.nodes):
        node = model.nodes[node_id]
        if node.concept_type is None or node_id not in on_edge:
            continue
        counter += 1
        slot_id = f"?x{counter}"
        mapping[node_id] = slot_id
        relabel[node_id] = f"{slot_id}: {node.concept_type}"
        slots.append(TemplateSlot(slot_id, node.concept_type))

    stripped = _substitute(model, mapping, relabel, {})
    no_evidence_inf = tuple(
        Influence(e.edge_id, e.source, e.target, e.polarity, e.weight)
        for e in stripped.influences
    )
    no_evidence_trg = tuple(
        Trigger(e.edge_id, e.source, e.target, e.effect, e.weight)
        for e in stripped.triggers
    )
    template_model = CausalModel(
        quantities=stripped.quantities,
        states=stripped.states,
        influences=no_evidence_inf,
        triggers=no_evidence_trg,
        mutexes=stripped.mutexes,
        scenario=stripped.scenario,
        provenance={"template_of": model.provenance.get("target", "")},
    )
    return Template(template_model, tuple(slots))


def instantiate_template(
    template: Template,
    bindings: dict[str, str],
    kb: KnowledgeBase,
    lexicon: Lexicon | None = None,
) -> CausalModel:
    """Bind slots to concepts, checking types, and re-evidence edges from the KB.

    Edges with no matching events keep the template weight and carry the
    template_derived flag.
    """
    if lexicon is None:
        lexicon = Lexicon(kb.lexicon_data) if kb.lexicon_data else Lexicon()
    slot_ids = {s.id for s in template.slots}
    unknown = set(bindings) - slot_ids
    if unknown:
        raise BuildError(f"unknown slots in bindings: {sorted(unknown)}")
    missing = slot_ids - set(bindings)
    if missing:
        raise BuildError(f"missing binding for slot {sorted(missing)[0]}")

    mapping: dict[str, str] = {}
    relabel: dict[str, str] = {}
    retype: dict[str, str | None] = {}
    used: set[str] = set()
    for slot in sorted(template.slots, key=lambda s: s.id):
        concept = kb.resolve(bindings[slot.id])
        if concept is None:
            raise BuildError(
                f"slot {slot.id}: cannot resolve binding '{bindings[slot.id]}'"
            )
        concept_types = kb.types_of(concept)
        if not any(
            kb.types.is_same_or_descendant(t, slot.type) for t in concept_types
        ):
            raise BuildError(
                f"slot {slot.id}: '{concept}' has no type matching '{slot.type}' "
                f"(found: {sorted(concept_types) or 'none'})"
            )
        if concept in used or (
            concept in template.model.nodes and concept not in slot_ids
        ):
            raise BuildError(f"slot {slot.id}: binding '{concept}' collides")
        used.add(concept)
        mapping[slot.id] = concept
        relabel[slot.id] = concept
        retype[slot.id] = slot.type

    concrete = _substitute(template.model, mapping, relabel, retype)

    def re_evidence(source: str, target: str, kind: str, flavor: str):
        matching = []
        for event_id in sorted(kb.events):
            event = kb.events[event_id]
            spec = map_predicate(event, lexicon)
            if spec is None or spec.kind != kind or spec.flavor != flavor:
                continue
            if kb.resolve(event.subject, create_if_missing=True) != source:
                continue
            if kb.resolve(event.object, create_if_missing=True) != target:
                continue
            matching.append(event)
        return matching

    influences = []
    for e in concrete.influences:
        events = re_evidence(e.source, e.target, "influence", e.polarity)
        if events:
            influences.append(
                Influence(
                    e.edge_id, e.source, e.target, e.polarity,
                    evidence_weight([ev.confidence for ev in events]),
                    tuple(Evidence(ev.doc_id, ev.passage) for ev in events),
                )
            )
        else:
            influences.append(
                Influence(e.edge_id, e.source, e.target, e.polarity, e.weight,
                          (), template_derived=True)
            )
    triggers = []
    for e in concrete.triggers:
        events = re_evidence(e.source, e.target, "trigger", e.effect)
        if events:
            triggers.append(
                Trigger(
                    e.edge_id, e.source, e.target, e.effect,
                    evidence_weight([ev.confidence for ev in events]),
                    tuple(Evidence(ev.doc_id, ev.passage) for ev in events),
                )
            )
        else:
            triggers.append(
                Trigger(e.edge_id, e.source, e.target, e.effect, e.weight,
                        (), template_derived=True)
            )

    instantiated = CausalModel(
        quantities=concrete.quantities,
        states=concrete.states,
        influences=tuple(influences),
        triggers=tuple(triggers),
        mutexes=concrete.mutexes,
        scenario=concrete.scenario,
        provenance=dict(
            concrete.provenance, instantiated_with=dict(sorted(bindings.items()))
        ),
    )
    issues = validate(instantiated)
    if issues:
        raise BuildError(
            "instantiated model failed validation: "
            + "; ".join(str(i) for i in issues[:5])
        )
    return instantiated
