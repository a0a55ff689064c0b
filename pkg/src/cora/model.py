"""Executable causal model: quantities, states, influences, triggers, mutexes.

Node identity is the normalized label.  Edge ids minted by this package are
content-derived (``inf:a->b:direct``, ``trg:s->q:increase``) so structurally
equal models serialize identically; documents loaded from JSON keep whatever
ids they declare.

All model types are immutable values after construction and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterable

from .util import normalize_label

DIRECT = "direct"
INVERSE = "inverse"
ACTIVATE = "activate"
INCREASE = "increase"
DECREASE = "decrease"

QUANTITY_VALUES = ("increasing", "decreasing", "steady")
STATE_VALUES = ("active",)

MAP_DOCUMENT_VERSION = 1


class SchemaError(ValueError):
    """A map document violates the schema; carries the offending JSON path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{message} at {path}")


@dataclass(frozen=True)
class Evidence:
    doc_id: str
    passage: str

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "passage": self.passage}


@dataclass(frozen=True)
class Quantity:
    id: str
    label: str
    concept_type: str | None = None


@dataclass(frozen=True)
class State:
    id: str
    label: str
    linked_quantity: str | None = None
    concept_type: str | None = None


@dataclass(frozen=True)
class Influence:
    edge_id: str
    source: str
    target: str
    polarity: str  # direct | inverse
    weight: float = 0.5
    evidence: tuple[Evidence, ...] = ()
    template_derived: bool = False


@dataclass(frozen=True)
class Trigger:
    edge_id: str
    source: str
    target: str
    effect: str  # activate | increase | decrease
    weight: float = 0.5
    evidence: tuple[Evidence, ...] = ()
    template_derived: bool = False


@dataclass(frozen=True)
class MutexConstraint:
    members: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))


@dataclass(frozen=True)
class Assumption:
    node: str
    value: str  # active | increasing | decreasing | steady


@dataclass(frozen=True)
class Scenario:
    assumptions: tuple[Assumption, ...] = ()
    target: str | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "assumptions", tuple(sorted(self.assumptions, key=lambda a: a.node))
        )

    def assumed(self, node: str) -> str | None:
        for a in self.assumptions:
            if a.node == node:
                return a.value
        return None


@dataclass(frozen=True)
class Issue:
    element: str
    message: str

    def __str__(self) -> str:
        return f"{self.element}: {self.message}"


def influence_id(source: str, target: str, polarity: str) -> str:
    return f"inf:{source}->{target}:{polarity}"


def trigger_id(source: str, target: str, effect: str) -> str:
    return f"trg:{source}->{target}:{effect}"


@dataclass(frozen=True)
class CausalModel:
    quantities: tuple[Quantity, ...] = ()
    states: tuple[State, ...] = ()
    influences: tuple[Influence, ...] = ()
    triggers: tuple[Trigger, ...] = ()
    mutexes: tuple[MutexConstraint, ...] = ()
    scenario: Scenario | None = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "quantities", tuple(sorted(self.quantities, key=lambda n: n.id))
        )
        object.__setattr__(self, "states", tuple(sorted(self.states, key=lambda n: n.id)))
        object.__setattr__(
            self, "influences", tuple(sorted(self.influences, key=lambda e: e.edge_id))
        )
        object.__setattr__(
            self, "triggers", tuple(sorted(self.triggers, key=lambda e: e.edge_id))
        )
        object.__setattr__(
            self, "mutexes", tuple(sorted(self.mutexes, key=lambda m: m.members))
        )

    @cached_property
    def nodes(self) -> dict[str, Quantity | State]:
        out: dict[str, Quantity | State] = {}
        for q in self.quantities:
            out[q.id] = q
        for s in self.states:
            out[s.id] = s
        return out

    @cached_property
    def edges(self) -> dict[str, Influence | Trigger]:
        out: dict[str, Influence | Trigger] = {}
        for e in self.influences:
            out[e.edge_id] = e
        for e in self.triggers:
            out[e.edge_id] = e
        return out

    def is_quantity(self, node_id: str) -> bool:
        return isinstance(self.nodes.get(node_id), Quantity)

    def is_state(self, node_id: str) -> bool:
        return isinstance(self.nodes.get(node_id), State)

    def label_of(self, node_id: str) -> str:
        node = self.nodes.get(node_id)
        return node.label if node is not None else node_id

    def with_scenario(self, scenario: Scenario | None) -> "CausalModel":
        return replace(self, scenario=scenario)


def validate(model: CausalModel) -> list[Issue]:
    """Check every structural invariant; empty result means the model is sound."""
    issues: list[Issue] = []
    seen_nodes: set[str] = set()
    for node in list(model.quantities) + list(model.states):
        if node.id in seen_nodes:
            issues.append(Issue(node.id, "duplicate node id"))
        seen_nodes.add(node.id)
        if not node.id:
            issues.append(Issue(node.label or "<empty>", "empty node id"))
    for state in model.states:
        if state.linked_quantity is not None:
            linked = model.nodes.get(state.linked_quantity)
            if linked is None:
                issues.append(
                    Issue(state.id, f"linked quantity '{state.linked_quantity}' not found")
                )
            elif not isinstance(linked, Quantity):
                issues.append(
                    Issue(state.id, f"linked node '{state.linked_quantity}' is not a quantity")
                )

    seen_edges: set[str] = set()
    for edge in list(model.influences) + list(model.triggers):
        if edge.edge_id in seen_edges:
            issues.append(Issue(edge.edge_id, "duplicate edge id"))
        seen_edges.add(edge.edge_id)
        if not 0.0 < edge.weight <= 1.0:
            issues.append(Issue(edge.edge_id, f"weight {edge.weight} outside (0,1]"))

    for inf in model.influences:
        if inf.polarity not in (DIRECT, INVERSE):
            issues.append(Issue(inf.edge_id, f"unknown polarity '{inf.polarity}'"))
        for end, node_id in (("source", inf.source), ("target", inf.target)):
            node = model.nodes.get(node_id)
            if node is None:
                issues.append(Issue(inf.edge_id, f"{end} '{node_id}' not found"))
            elif not isinstance(node, Quantity):
                issues.append(
                    Issue(inf.edge_id, "influence endpoints must be quantities")
                )

    for trg in model.triggers:
        source = model.nodes.get(trg.source)
        if source is None:
            issues.append(Issue(trg.edge_id, f"source '{trg.source}' not found"))
        elif not isinstance(source, State):
            issues.append(Issue(trg.edge_id, "trigger source must be a state"))
        target = model.nodes.get(trg.target)
        if target is None:
            issues.append(Issue(trg.edge_id, f"target '{trg.target}' not found"))
        elif trg.effect == ACTIVATE and not isinstance(target, State):
            issues.append(Issue(trg.edge_id, "effect/target kind mismatch"))
        elif trg.effect in (INCREASE, DECREASE) and not isinstance(target, Quantity):
            issues.append(Issue(trg.edge_id, "effect/target kind mismatch"))
        elif trg.effect not in (ACTIVATE, INCREASE, DECREASE):
            issues.append(Issue(trg.edge_id, f"unknown effect '{trg.effect}'"))

    for mutex in model.mutexes:
        name = "mutex(" + ", ".join(mutex.members) + ")"
        if len(set(mutex.members)) < 2:
            issues.append(Issue(name, "mutex needs at least 2 distinct members"))
        for member in mutex.members:
            node = model.nodes.get(member)
            if node is None:
                issues.append(Issue(name, f"member '{member}' not found"))
            elif not isinstance(node, State):
                issues.append(Issue(name, f"member '{member}' is not a state"))

    if model.scenario is not None:
        seen_assumed: set[str] = set()
        for a in model.scenario.assumptions:
            node = model.nodes.get(a.node)
            if node is None:
                issues.append(Issue(a.node, "assumed node not found"))
                continue
            if a.node in seen_assumed:
                issues.append(Issue(a.node, "node assumed twice"))
            seen_assumed.add(a.node)
            if isinstance(node, State) and a.value not in STATE_VALUES:
                issues.append(
                    Issue(a.node, f"state assumption value must be 'active', got '{a.value}'")
                )
            if isinstance(node, Quantity) and a.value not in QUANTITY_VALUES:
                issues.append(
                    Issue(
                        a.node,
                        f"quantity assumption value must be one of {QUANTITY_VALUES}, got '{a.value}'",
                    )
                )
        if model.scenario.target is not None and model.scenario.target not in model.nodes:
            issues.append(Issue(model.scenario.target, "scenario target not found"))

    return issues


def structural_equal(
    a: CausalModel,
    b: CausalModel,
    include_evidence: bool = True,
) -> bool:
    """Compare two models by content, ignoring edge ids and provenance.

    Edge ids are referential plumbing: two models describing the same graph
    with different id schemes are structurally equal.  Set include_evidence
    to False to also ignore evidence lists and template-derived flags (the
    DSL carries neither; JSON is the lossless format).
    """

    def node_key(model: CausalModel):
        qs = {(q.id, q.label, q.concept_type) for q in model.quantities}
        ss = {(s.id, s.label, s.linked_quantity, s.concept_type) for s in model.states}
        return qs, ss

    def edge_key(edge: Influence | Trigger):
        kind_field = edge.polarity if isinstance(edge, Influence) else edge.effect
        base = (type(edge).__name__, edge.source, edge.target, kind_field, edge.weight)
        if include_evidence:
            return base + (edge.evidence, edge.template_derived)
        return base

    def edge_bag(model: CausalModel):
        return sorted(edge_key(e) for e in list(model.influences) + list(model.triggers))

    if node_key(a) != node_key(b):
        return False
    if edge_bag(a) != edge_bag(b):
        return False
    if {m.members for m in a.mutexes} != {m.members for m in b.mutexes}:
        return False
    return a.scenario == b.scenario


# ---------------------------------------------------------------------------
# MapDocument JSON


def to_json(model: CausalModel) -> dict:
    """Serialize to the MapDocument schema (lossless, deterministic order)."""
    nodes = []
    for q in model.quantities:
        node: dict = {"id": q.id, "label": q.label, "kind": "quantity"}
        if q.concept_type is not None:
            node["type"] = q.concept_type
        nodes.append(node)
    for s in model.states:
        node = {"id": s.id, "label": s.label, "kind": "state"}
        if s.concept_type is not None:
            node["type"] = s.concept_type
        if s.linked_quantity is not None:
            node["linked_quantity"] = s.linked_quantity
        nodes.append(node)
    nodes.sort(key=lambda n: n["id"])

    edges = []
    for inf in model.influences:
        edge: dict = {
            "id": inf.edge_id,
            "source": inf.source,
            "target": inf.target,
            "kind": "influence",
            "polarity": inf.polarity,
            "weight": inf.weight,
            "evidence": [ev.to_dict() for ev in inf.evidence],
        }
        if inf.template_derived:
            edge["template_derived"] = True
        edges.append(edge)
    for trg in model.triggers:
        edge = {
            "id": trg.edge_id,
            "source": trg.source,
            "target": trg.target,
            "kind": "trigger",
            "effect": trg.effect,
            "weight": trg.weight,
            "evidence": [ev.to_dict() for ev in trg.evidence],
        }
        if trg.template_derived:
            edge["template_derived"] = True
        edges.append(edge)
    edges.sort(key=lambda e: e["id"])

    scenario = None
    if model.scenario is not None:
        scenario = {
            "assumptions": [
                {"node": a.node, "value": a.value} for a in model.scenario.assumptions
            ],
            "target": model.scenario.target,
        }

    return {
        "version": MAP_DOCUMENT_VERSION,
        "nodes": nodes,
        "edges": edges,
        "mutexes": [list(m.members) for m in model.mutexes],
        "scenario": scenario,
        "provenance": dict(model.provenance),
    }


def _expect(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise SchemaError(path, message)


def from_json(document: dict) -> CausalModel:
    """Parse a MapDocument; raises SchemaError with a JSON path on violation."""
    _expect(isinstance(document, dict), "$", "document must be an object")
    _expect("nodes" in document, "$.nodes", "missing required field")
    _expect("edges" in document, "$.edges", "missing required field")
    version = document.get("version", MAP_DOCUMENT_VERSION)
    _expect(
        version == MAP_DOCUMENT_VERSION,
        "$.version",
        f"unsupported version {version!r}",
    )

    raw_nodes = document["nodes"]
    _expect(isinstance(raw_nodes, list), "$.nodes", "must be an array")
    quantities: list[Quantity] = []
    states: list[State] = []
    for i, raw in enumerate(raw_nodes):
        path = f"$.nodes[{i}]"
        _expect(isinstance(raw, dict), path, "must be an object")
        for name in ("id", "label", "kind"):
            _expect(name in raw, f"{path}.{name}", "missing required field")
            _expect(isinstance(raw[name], str), f"{path}.{name}", "must be a string")
        kind = raw["kind"]
        concept_type = raw.get("type")
        _expect(
            concept_type is None or isinstance(concept_type, str),
            f"{path}.type",
            "must be a string",
        )
        if kind == "quantity":
            quantities.append(Quantity(raw["id"], raw["label"], concept_type))
        elif kind == "state":
            linked = raw.get("linked_quantity")
            _expect(
                linked is None or isinstance(linked, str),
                f"{path}.linked_quantity",
                "must be a string",
            )
            states.append(State(raw["id"], raw["label"], linked, concept_type))
        else:
            raise SchemaError(f"{path}.kind", f"unknown node kind {kind!r}")

    raw_edges = document["edges"]
    _expect(isinstance(raw_edges, list), "$.edges", "must be an array")
    influences: list[Influence] = []
    triggers: list[Trigger] = []
    for i, raw in enumerate(raw_edges):
        path = f"$.edges[{i}]"
        _expect(isinstance(raw, dict), path, "must be an object")
        for name in ("id", "source", "target", "kind"):
            _expect(name in raw, f"{path}.{name}", "missing required field")
            _expect(isinstance(raw[name], str), f"{path}.{name}", "must be a string")
        weight = raw.get("weight", 0.5)
        _expect(
            isinstance(weight, (int, float)) and not isinstance(weight, bool),
            f"{path}.weight",
            "must be a number",
        )
        raw_evidence = raw.get("evidence", [])
        _expect(isinstance(raw_evidence, list), f"{path}.evidence", "must be an array")
        evidence = []
        for j, ev in enumerate(raw_evidence):
            ev_path = f"{path}.evidence[{j}]"
            _expect(isinstance(ev, dict), ev_path, "must be an object")
            evidence.append(
                Evidence(str(ev.get("doc_id", "")), str(ev.get("passage", "")))
            )
        template_derived = bool(raw.get("template_derived", False))
        kind = raw["kind"]
        if kind == "influence":
            polarity = raw.get("polarity")
            _expect(
                polarity in (DIRECT, INVERSE),
                f"{path}.polarity",
                f"must be 'direct' or 'inverse', got {polarity!r}",
            )
            influences.append(
                Influence(
                    raw["id"], raw["source"], raw["target"], polarity,
                    float(weight), tuple(evidence), template_derived,
                )
            )
        elif kind == "trigger":
            effect = raw.get("effect")
            _expect(
                effect in (ACTIVATE, INCREASE, DECREASE),
                f"{path}.effect",
                f"must be 'activate', 'increase' or 'decrease', got {effect!r}",
            )
            triggers.append(
                Trigger(
                    raw["id"], raw["source"], raw["target"], effect,
                    float(weight), tuple(evidence), template_derived,
                )
            )
        else:
            raise SchemaError(f"{path}.kind", f"unknown edge kind {kind!r}")

    raw_mutexes = document.get("mutexes", [])
    _expect(isinstance(raw_mutexes, list), "$.mutexes", "must be an array")
    mutexes = []
    for i, raw in enumerate(raw_mutexes):
        path = f"$.mutexes[{i}]"
        _expect(isinstance(raw, list), path, "must be an array of node ids")
        _expect(
            all(isinstance(m, str) for m in raw), path, "members must be strings"
        )
        mutexes.append(MutexConstraint(tuple(raw)))

    scenario = None
    raw_scenario = document.get("scenario")
    if raw_scenario is not None:
        _expect(isinstance(raw_scenario, dict), "$.scenario", "must be an object or null")
        raw_assumptions = raw_scenario.get("assumptions", [])
        _expect(
            isinstance(raw_assumptions, list),
            "$.scenario.assumptions",
            "must be an array",
        )
        assumptions = []
        for i, raw in enumerate(raw_assumptions):
            path = f"$.scenario.assumptions[{i}]"
            _expect(isinstance(raw, dict), path, "must be an object")
            _expect("node" in raw, f"{path}.node", "missing required field")
            _expect("value" in raw, f"{path}.value", "missing required field")
            assumptions.append(Assumption(str(raw["node"]), str(raw["value"])))
        target = raw_scenario.get("target")
        _expect(
            target is None or isinstance(target, str),
            "$.scenario.target",
            "must be a string or null",
        )
        scenario = Scenario(tuple(assumptions), target)

    provenance = document.get("provenance", {})
    _expect(isinstance(provenance, dict), "$.provenance", "must be an object")

    return CausalModel(
        quantities=tuple(quantities),
        states=tuple(states),
        influences=tuple(influences),
        triggers=tuple(triggers),
        mutexes=tuple(mutexes),
        scenario=scenario,
        provenance=dict(provenance),
    )


def make_node_id(label: str) -> str:
    return normalize_label(label)


def edges_of(model: CausalModel) -> Iterable[Influence | Trigger]:
    return list(model.influences) + list(model.triggers)


def edge_sort_key(edge: Influence | Trigger) -> Any:
    return edge.edge_id
