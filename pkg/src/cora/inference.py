"""Qualitative causal inference over a CausalModel and its scenario.

Semantics, in three phases:

1. Trigger phase.  Assumed states are active; activation propagates along
   ``activate`` trigger edges (simple chains only, never through another
   assumed state).  A trigger with an increase/decrease effect converts each
   activation chain reaching it into a derived direction on its target
   quantity, carrying the product of trigger weights as strength.

2. Path phase.  Every assumed or derived quantity direction is a pressure
   source.  All simple influence paths of at most ``max_path_len`` hops from
   a source to the target are enumerated, excluding paths through any other
   assumed or clamped node: a fixed node blocks upstream flow.

3. Netting.  A path's sign is its source direction composed with its hop
   polarities (inverse flips); its strength is the product of all hop
   weights, trigger hops included.  U is the total strength of '+' paths,
   D of '-' paths.  With u = U/(U+D) and d = D/(U+D): the verdict is
   increasing when u-d > tau, decreasing when d-u > tau, otherwise
   ambiguous; steady exactly when U = D = 0 and nothing contradicts.

Contradictions (two or more mutually-exclusive states active at once) are
always reported alongside the verdict; they are never silently cancelled.

infer/whatif/check_consistency are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

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
    trigger_id,
    validate,
)
from .util import normalize_label

DEFAULT_TAU = 0.05
DEFAULT_MAX_PATH_LEN = 6
DEFAULT_EXPLAIN_TOP_K = 5

NETTING_RULE = "normalized-mass-threshold"

NO_PATHS_SENTENCE = "No causal paths found from the assumed factors to the target."


class InferenceError(Exception):
    """A model or parameter precondition failed."""


@dataclass(frozen=True)
class InferenceParams:
    tau: float = DEFAULT_TAU
    max_path_len: int = DEFAULT_MAX_PATH_LEN

    def check(self) -> None:
        if self.tau < 0:
            raise InferenceError(f"tau must be >= 0, got {self.tau}")
        if not isinstance(self.max_path_len, int) or self.max_path_len < 1:
            raise InferenceError(f"max_path_len must be an integer >= 1, got {self.max_path_len}")


@dataclass(frozen=True)
class Verdict:
    direction: str  # increasing | decreasing | steady | ambiguous
    upward_mass: float
    downward_mass: float
    tau: float

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "U": self.upward_mass,
            "D": self.downward_mass,
            "tau": self.tau,
        }


@dataclass(frozen=True)
class HopDetail:
    """Rendering info for one hop; not part of the wire format."""

    edge_id: str
    source_label: str
    target_label: str
    descriptor: str  # direct | inverse | activate | increase | decrease
    weight: float
    doc_ids: tuple[str, ...]


@dataclass(frozen=True)
class ProofPath:
    source: str
    hops: tuple[str, ...]
    sign: str  # '+' | '-'
    strength: float
    evidence: tuple[Evidence, ...]
    nodes: tuple[str, ...] = field(compare=False, default=())
    source_label: str = field(compare=False, default="")
    source_value: str = field(compare=False, default="")
    hop_details: tuple[HopDetail, ...] = field(compare=False, default=())

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "hops": list(self.hops),
            "sign": self.sign,
            "strength": self.strength,
            "evidence": [ev.to_dict() for ev in self.evidence],
        }


@dataclass(frozen=True)
class Derivation:
    node: str
    chains: tuple[tuple[str, ...], ...]  # edge-id chains; empty chain = assumed
    summaries: tuple[str, ...] = field(compare=False, default=())

    def to_dict(self) -> dict:
        return {"node": self.node, "chains": [list(c) for c in self.chains]}


@dataclass(frozen=True)
class Contradiction:
    members: tuple[str, ...]
    derivations: tuple[Derivation, ...]
    member_labels: tuple[str, ...] = field(compare=False, default=())

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "derivations": [d.to_dict() for d in self.derivations],
        }


@dataclass(frozen=True)
class InferenceResult:
    verdict: Verdict
    paths: tuple[ProofPath, ...]
    contradictions: tuple[Contradiction, ...]
    explanation: str
    notes: tuple[str, ...] = ()
    target: str = field(compare=False, default="")
    target_label: str = field(compare=False, default="")
    params: InferenceParams = field(compare=False, default_factory=InferenceParams)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.to_dict(),
            "paths": [p.to_dict() for p in self.paths],
            "contradictions": [c.to_dict() for c in self.contradictions],
            "explanation": self.explanation,
            "notes": list(self.notes),
            "provenance": {
                "netting": NETTING_RULE,
                "tau": self.params.tau,
                "max_path_len": self.params.max_path_len,
            },
        }


# ---------------------------------------------------------------------------
# Trigger phase

@dataclass(frozen=True)
class _DerivedSource:
    origin: str            # assumed node the pressure is traced back to
    origin_value: str      # active / increasing / decreasing
    chain: tuple[str, ...]  # trigger edge ids, empty for direct assumptions
    quantity: str          # pressure entry point into the influence graph
    direction: str         # increasing | decreasing
    strength: float


def _activation_chains(
    model: CausalModel, assumed: dict[str, str]
) -> dict[str, list[tuple[str, tuple[str, ...], float]]]:
    """All simple activation chains per active state.

    Returns state id -> list of (origin, trigger edge ids, weight product).
    Assumed states carry the empty chain.  Chains never pass through another
    assumed state: a pinned node blocks flow, and it is an origin itself.
    """
    activate_adj: dict[str, list[Trigger]] = {}
    for trg in model.triggers:
        if trg.effect == ACTIVATE:
            activate_adj.setdefault(trg.source, []).append(trg)
    for edges in activate_adj.values():
        edges.sort(key=lambda e: e.edge_id)

    assumed_states = sorted(
        node for node, value in assumed.items() if value == "active"
    )
    chains: dict[str, list[tuple[str, tuple[str, ...], float]]] = {}
    for origin in assumed_states:
        chains.setdefault(origin, []).append((origin, (), 1.0))
        stack: list[tuple[str, tuple[str, ...], float, frozenset[str]]] = [
            (origin, (), 1.0, frozenset([origin]))
        ]
        while stack:
            node, chain, weight, visited = stack.pop()
            for trg in activate_adj.get(node, ()):
                nxt = trg.target
                if nxt in visited or nxt in assumed:
                    continue
                new_chain = chain + (trg.edge_id,)
                new_weight = weight * trg.weight
                chains.setdefault(nxt, []).append((origin, new_chain, new_weight))
                stack.append((nxt, new_chain, new_weight, visited | {nxt}))
    for entries in chains.values():
        entries.sort(key=lambda e: (len(e[1]), e[0], e[1]))
    return chains


def _derived_sources(
    model: CausalModel,
    assumed: dict[str, str],
    chains: dict[str, list[tuple[str, tuple[str, ...], float]]],
) -> tuple[list[_DerivedSource], list[str]]:
    sources: list[_DerivedSource] = []
    notes: list[str] = []
    for node, value in sorted(assumed.items()):
        if model.is_quantity(node) and value in ("increasing", "decreasing"):
            sources.append(_DerivedSource(node, value, (), node, value, 1.0))

    set_direction = sorted(
        (t for t in model.triggers if t.effect in (INCREASE, DECREASE)),
        key=lambda t: t.edge_id,
    )
    overridden: set[str] = set()
    for trg in set_direction:
        direction = "increasing" if trg.effect == INCREASE else "decreasing"
        for origin, chain, weight in chains.get(trg.source, ()):
            if trg.target in assumed:
                overridden.add(trg.target)
                continue
            sources.append(
                _DerivedSource(
                    origin,
                    assumed.get(origin, "active"),
                    chain + (trg.edge_id,),
                    trg.target,
                    direction,
                    weight * trg.weight,
                )
            )
    for node in sorted(overridden):
        notes.append(
            f"derived direction on '{model.label_of(node)}' overridden by its assumed value"
        )
    return sources, notes


def _active_states(
    chains: dict[str, list[tuple[str, tuple[str, ...], float]]]
) -> set[str]:
    return set(chains)


# ---------------------------------------------------------------------------
# Path phase

def _influence_adjacency(model: CausalModel) -> dict[str, list[Influence]]:
    adj: dict[str, list[Influence]] = {}
    for inf in model.influences:
        adj.setdefault(inf.source, []).append(inf)
    for edges in adj.values():
        edges.sort(key=lambda e: e.edge_id)
    return adj


def _influence_paths(
    model: CausalModel,
    adj: dict[str, list[Influence]],
    source: _DerivedSource,
    target: str,
    blocked: set[str],
    max_len: int,
) -> list[ProofPath]:
    results: list[ProofPath] = []
    base_sign = +1 if source.direction == "increasing" else -1

    def emit(edge_ids: tuple[str, ...], sign: int, strength: float, nodes: tuple[str, ...]):
        results.append(
            _make_path(model, source, edge_ids, sign, strength, nodes)
        )

    if source.quantity == target:
        if source.chain:  # a trigger chain ending on the target is itself a path
            emit(source.chain, base_sign, source.strength, _chain_nodes(model, source))
        return results

    start_nodes = _chain_nodes(model, source)

    def dfs(node: str, edge_ids: tuple[str, ...], visited: frozenset[str],
            sign: int, strength: float, nodes: tuple[str, ...]):
        if len(edge_ids) - len(source.chain) >= max_len:
            return
        for inf in adj.get(node, ()):
            nxt = inf.target
            if nxt in visited:
                continue
            hop_sign = -1 if inf.polarity == INVERSE else +1
            new_ids = edge_ids + (inf.edge_id,)
            new_strength = strength * inf.weight
            new_sign = sign * hop_sign
            if nxt == target:
                emit(new_ids, new_sign, new_strength, nodes + (nxt,))
                continue
            if nxt in blocked:
                continue
            dfs(nxt, new_ids, visited | {nxt}, new_sign, new_strength, nodes + (nxt,))

    dfs(source.quantity, source.chain, frozenset([source.quantity]),
        base_sign, source.strength, start_nodes)
    return results


def _chain_nodes(model: CausalModel, source: _DerivedSource) -> tuple[str, ...]:
    nodes = [source.origin]
    for edge_id in source.chain:
        nodes.append(model.edges[edge_id].target)
    return tuple(nodes)


def _make_path(
    model: CausalModel,
    source: _DerivedSource,
    edge_ids: tuple[str, ...],
    sign: int,
    strength: float,
    nodes: tuple[str, ...],
) -> ProofPath:
    evidence: list[Evidence] = []
    details: list[HopDetail] = []
    for edge_id in edge_ids:
        edge = model.edges[edge_id]
        evidence.extend(edge.evidence)
        descriptor = edge.polarity if isinstance(edge, Influence) else edge.effect
        details.append(
            HopDetail(
                edge_id=edge_id,
                source_label=model.label_of(edge.source),
                target_label=model.label_of(edge.target),
                descriptor=descriptor,
                weight=edge.weight,
                doc_ids=tuple(
                    sorted({ev.doc_id for ev in edge.evidence if ev.doc_id})
                ),
            )
        )
    return ProofPath(
        source=source.origin,
        hops=tuple(edge_ids),
        sign="+" if sign > 0 else "-",
        strength=strength,
        evidence=tuple(evidence),
        nodes=nodes,
        source_label=model.label_of(source.origin),
        source_value=source.origin_value,
        hop_details=tuple(details),
    )


# ---------------------------------------------------------------------------
# Contradictions

def _contradictions(
    model: CausalModel,
    chains: dict[str, list[tuple[str, tuple[str, ...], float]]],
) -> tuple[Contradiction, ...]:
    active = _active_states(chains)
    found: list[Contradiction] = []
    for mutex in model.mutexes:
        violating = tuple(sorted(m for m in mutex.members if m in active))
        if len(violating) < 2:
            continue
        derivations = []
        for member in violating:
            member_chains = tuple(chain for _, chain, _ in chains[member])
            summaries = tuple(
                _chain_summary(model, origin, chain)
                for origin, chain, _ in chains[member]
            )
            derivations.append(Derivation(member, member_chains, summaries))
        found.append(
            Contradiction(
                members=violating,
                derivations=tuple(derivations),
                member_labels=tuple(model.label_of(m) for m in violating),
            )
        )
    return tuple(found)


def _chain_summary(model: CausalModel, origin: str, chain: tuple[str, ...]) -> str:
    if not chain:
        return f"'{model.label_of(origin)}' is assumed"
    parts = [f"'{model.label_of(origin)}'"]
    for edge_id in chain:
        edge = model.edges[edge_id]
        parts.append(f"-({edge.effect} {edge.weight:.2f})-> '{model.label_of(edge.target)}'")
    return "assumed " + " ".join(parts)


# ---------------------------------------------------------------------------
# Engine entry points

def infer(model: CausalModel, params: InferenceParams | None = None) -> InferenceResult:
    """Run causal inference against the model's scenario."""
    params = params or InferenceParams()
    params.check()
    issues = validate(model)
    if issues:
        raise InferenceError(
            "model is invalid: " + "; ".join(str(i) for i in issues[:5])
        )
    scenario = model.scenario
    if scenario is None or scenario.target is None:
        raise InferenceError("model has no scenario target; add a query")
    target = scenario.target
    if not model.is_quantity(target):
        raise InferenceError(
            f"target '{model.label_of(target)}' must be a quantity"
        )
    assumed = {a.node: a.value for a in scenario.assumptions}
    if target in assumed:
        raise InferenceError(
            f"target '{model.label_of(target)}' is fixed by an assumption or clamp; "
            "unclamp it to evaluate pressure"
        )

    chains = _activation_chains(model, assumed)
    sources, notes = _derived_sources(model, assumed, chains)
    blocked = set(assumed)
    adjacency = _influence_adjacency(model)

    paths: list[ProofPath] = []
    for source in sources:
        source_blocked = blocked - {source.quantity}
        paths.extend(
            _influence_paths(
                model, adjacency, source, target, source_blocked, params.max_path_len
            )
        )
    paths.sort(key=lambda p: (-p.strength, p.source, p.hops))

    upward = 0.0
    downward = 0.0
    for path in paths:
        if path.sign == "+":
            upward += path.strength
        else:
            downward += path.strength

    contradictions = _contradictions(model, chains)

    total = upward + downward
    if total > 0:
        u, d = upward / total, downward / total
        if u - d > params.tau:
            direction = "increasing"
        elif d - u > params.tau:
            direction = "decreasing"
        else:
            direction = "ambiguous"
    else:
        direction = "steady" if not contradictions else "ambiguous"
        if assumed:
            notes.append(NO_PATHS_SENTENCE)

    verdict = Verdict(direction, upward, downward, params.tau)
    result = InferenceResult(
        verdict=verdict,
        paths=tuple(paths),
        contradictions=contradictions,
        explanation="",
        notes=tuple(notes),
        target=target,
        target_label=model.label_of(target),
        params=params,
    )
    return replace(result, explanation=explain(result, DEFAULT_EXPLAIN_TOP_K))


def check_consistency(
    model: CausalModel, params: InferenceParams | None = None
) -> list[Contradiction]:
    """Mutex violations in the activation closure; empty list means consistent."""
    params = params or InferenceParams()
    params.check()
    issues = validate(model)
    if issues:
        raise InferenceError(
            "model is invalid: " + "; ".join(str(i) for i in issues[:5])
        )
    if model.scenario is None:
        return []
    assumed = {a.node: a.value for a in model.scenario.assumptions}
    chains = _activation_chains(model, assumed)
    return list(_contradictions(model, chains))


# ---------------------------------------------------------------------------
# Explanation rendering

def _render_path(index: int, path: ProofPath) -> str:
    parts = [f"'{path.source_label}' [assumed {path.source_value}]"]
    for hop in path.hop_details:
        docs = f"; docs {', '.join(hop.doc_ids)}" if hop.doc_ids else ""
        parts.append(f"-({hop.descriptor} {hop.weight:.2f}{docs})-> '{hop.target_label}'")
    return f"  {index}. (strength {path.strength:.4f}) " + " ".join(parts)


def explain(result: InferenceResult, k: int = DEFAULT_EXPLAIN_TOP_K) -> str:
    """Deterministic template text for a result: verdict, pressures, contradictions."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    verdict = result.verdict
    if verdict.direction == "steady" and not result.paths:
        return NO_PATHS_SENTENCE

    lines = [
        f"Verdict: '{result.target_label}' is {verdict.direction} "
        f"(upward mass {verdict.upward_mass:.6f}, downward mass {verdict.downward_mass:.6f}, "
        f"tau {verdict.tau})."
    ]
    upward = [p for p in result.paths if p.sign == "+"]
    downward = [p for p in result.paths if p.sign == "-"]
    lines.append("Upward pressures:")
    if upward:
        lines.extend(_render_path(i + 1, p) for i, p in enumerate(upward[:k]))
        if len(upward) > k:
            lines.append(f"  ... and {len(upward) - k} more")
    else:
        lines.append("  (none)")
    lines.append("Downward pressures:")
    if downward:
        lines.extend(_render_path(i + 1, p) for i, p in enumerate(downward[:k]))
        if len(downward) > k:
            lines.append(f"  ... and {len(downward) - k} more")
    else:
        lines.append("  (none)")
    for contradiction in result.contradictions:
        members = ", ".join(f"'{label}'" for label in contradiction.member_labels)
        lines.append(
            f"Contradiction: states {members} are mutually exclusive but simultaneously active."
        )
        for derivation in contradiction.derivations:
            for summary in derivation.summaries:
                lines.append(f"  - {summary}")
    for note in result.notes:
        lines.append(f"Note: {note}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# What-if edits

EDIT_OPS = (
    "set_weight",
    "remove_edge",
    "add_edge",
    "add_node",
    "remove_node",
    "clamp",
    "unclamp",
)


@dataclass(frozen=True)
class Edit:
    op: str
    edge: str | None = None
    node: str | None = None
    weight: float | None = None
    value: str | None = None
    spec: dict | None = field(default=None, hash=False)

    def to_dict(self) -> dict:
        out: dict = {"op": self.op}
        if self.edge is not None:
            out["edge"] = self.edge
        if self.node is not None:
            out["node"] = self.node
        if self.weight is not None:
            out["weight"] = self.weight
        if self.value is not None:
            out["value"] = self.value
        if self.spec is not None:
            out["spec"] = self.spec
        return out


class EditRejection(Exception):
    """An edit set was rejected; nothing was applied."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"edit {index}: {reason}")


def parse_edits(raw_edits: Sequence[dict]) -> list[Edit]:
    edits: list[Edit] = []
    for i, raw in enumerate(raw_edits):
        if not isinstance(raw, dict) or "op" not in raw:
            raise EditRejection(i, "edit must be an object with an 'op' field")
        op = raw["op"]
        if op not in EDIT_OPS:
            raise EditRejection(i, f"unknown op '{op}'")
        weight = raw.get("weight")
        if weight is not None:
            if not isinstance(weight, (int, float)) or isinstance(weight, bool):
                raise EditRejection(i, "weight must be a number")
            weight = float(weight)
        edits.append(
            Edit(
                op=op,
                edge=raw.get("edge"),
                node=raw.get("node"),
                weight=weight,
                value=raw.get("value"),
                spec=raw.get("spec"),
            )
        )
    return edits


def _apply_one(model: CausalModel, index: int, edit: Edit) -> CausalModel:
    if edit.op == "set_weight":
        if edit.edge is None or edit.edge not in model.edges:
            raise EditRejection(index, f"edge '{edit.edge}' not found")
        if edit.weight is None or not 0.0 < edit.weight <= 1.0:
            raise EditRejection(index, f"weight {edit.weight} outside (0,1]")
        influences = tuple(
            replace(e, weight=edit.weight) if e.edge_id == edit.edge else e
            for e in model.influences
        )
        triggers = tuple(
            replace(e, weight=edit.weight) if e.edge_id == edit.edge else e
            for e in model.triggers
        )
        return replace(model, influences=influences, triggers=triggers)

    if edit.op == "remove_edge":
        if edit.edge is None or edit.edge not in model.edges:
            raise EditRejection(index, f"edge '{edit.edge}' not found")
        return replace(
            model,
            influences=tuple(e for e in model.influences if e.edge_id != edit.edge),
            triggers=tuple(e for e in model.triggers if e.edge_id != edit.edge),
        )

    if edit.op == "add_edge":
        spec = edit.spec or {}
        for name in ("source", "target", "kind"):
            if not isinstance(spec.get(name), str):
                raise EditRejection(index, f"add_edge spec needs string '{name}'")
        weight = spec.get("weight", 0.5)
        if not isinstance(weight, (int, float)) or not 0.0 < float(weight) <= 1.0:
            raise EditRejection(index, f"weight {weight} outside (0,1]")
        evidence = tuple(
            Evidence(str(ev.get("doc_id", "")), str(ev.get("passage", "")))
            for ev in spec.get("evidence", [])
            if isinstance(ev, dict)
        )
        source, target = spec["source"], spec["target"]
        if spec["kind"] == "influence":
            polarity = spec.get("polarity")
            if polarity not in (DIRECT, INVERSE):
                raise EditRejection(index, f"bad polarity {polarity!r}")
            edge_id = spec.get("id") or influence_id(source, target, polarity)
            if edge_id in model.edges:
                raise EditRejection(index, f"edge '{edge_id}' already exists")
            new_edge = Influence(edge_id, source, target, polarity, float(weight), evidence)
            return replace(model, influences=model.influences + (new_edge,))
        if spec["kind"] == "trigger":
            effect = spec.get("effect")
            if effect not in (ACTIVATE, INCREASE, DECREASE):
                raise EditRejection(index, f"bad effect {effect!r}")
            edge_id = spec.get("id") or trigger_id(source, target, effect)
            if edge_id in model.edges:
                raise EditRejection(index, f"edge '{edge_id}' already exists")
            new_edge = Trigger(edge_id, source, target, effect, float(weight), evidence)
            return replace(model, triggers=model.triggers + (new_edge,))
        raise EditRejection(index, f"unknown edge kind {spec['kind']!r}")

    if edit.op == "add_node":
        spec = edit.spec or {}
        label = spec.get("label")
        kind = spec.get("kind")
        if not isinstance(label, str) or not label.strip():
            raise EditRejection(index, "add_node spec needs a non-empty 'label'")
        if kind not in ("quantity", "state"):
            raise EditRejection(index, f"bad node kind {kind!r}")
        node_id = spec.get("id") or normalize_label(label)
        if node_id in model.nodes:
            raise EditRejection(index, f"node '{node_id}' already exists")
        if kind == "quantity":
            node = Quantity(node_id, label, spec.get("type"))
            return replace(model, quantities=model.quantities + (node,))
        node = State(node_id, label, spec.get("linked_quantity"), spec.get("type"))
        return replace(model, states=model.states + (node,))

    if edit.op == "remove_node":
        node_id = edit.node
        if node_id is None or node_id not in model.nodes:
            raise EditRejection(index, f"node '{node_id}' not found")
        scenario = model.scenario
        if scenario is not None and scenario.target == node_id:
            raise EditRejection(index, "cannot remove the scenario target")
        influences = tuple(
            e for e in model.influences if node_id not in (e.source, e.target)
        )
        triggers = tuple(
            e for e in model.triggers if node_id not in (e.source, e.target)
        )
        mutexes = []
        for mutex in model.mutexes:
            members = tuple(m for m in mutex.members if m != node_id)
            if len(members) >= 2:
                mutexes.append(MutexConstraint(members))
        if scenario is not None:
            scenario = Scenario(
                tuple(a for a in scenario.assumptions if a.node != node_id),
                scenario.target,
            )
        states = tuple(
            replace(s, linked_quantity=None) if s.linked_quantity == node_id else s
            for s in model.states
            if s.id != node_id
        )
        return replace(
            model,
            quantities=tuple(q for q in model.quantities if q.id != node_id),
            states=states,
            influences=influences,
            triggers=triggers,
            mutexes=tuple(mutexes),
            scenario=scenario,
        )

    if edit.op == "clamp":
        node_id = edit.node
        if node_id is None or node_id not in model.nodes:
            raise EditRejection(index, f"node '{node_id}' not found")
        value = edit.value
        if model.is_state(node_id) and value != "active":
            raise EditRejection(index, f"states clamp to 'active', got {value!r}")
        if model.is_quantity(node_id) and value not in ("increasing", "decreasing", "steady"):
            raise EditRejection(
                index, f"quantities clamp to increasing/decreasing/steady, got {value!r}"
            )
        scenario = model.scenario or Scenario()
        assumptions = tuple(a for a in scenario.assumptions if a.node != node_id)
        scenario = Scenario(assumptions + (Assumption(node_id, value),), scenario.target)
        return replace(model, scenario=scenario)

    if edit.op == "unclamp":
        node_id = edit.node
        scenario = model.scenario
        if (
            node_id is None
            or scenario is None
            or scenario.assumed(node_id) is None
        ):
            raise EditRejection(index, f"node '{node_id}' is not assumed or clamped")
        scenario = Scenario(
            tuple(a for a in scenario.assumptions if a.node != node_id),
            scenario.target,
        )
        return replace(model, scenario=scenario)

    raise EditRejection(index, f"unknown op '{edit.op}'")


def apply_edits(model: CausalModel, edits: Iterable[Edit]) -> CausalModel:
    """Apply an edit set atomically; any failure rejects the whole set."""
    current = model
    edit_list = list(edits)
    for index, edit in enumerate(edit_list):
        current = _apply_one(current, index, edit)
    issues = validate(current)
    if issues:
        raise EditRejection(
            len(edit_list) - 1 if edit_list else 0,
            "edited model is invalid: " + "; ".join(str(i) for i in issues[:3]),
        )
    return current


def whatif(
    model: CausalModel,
    edits: Iterable[Edit],
    params: InferenceParams | None = None,
) -> InferenceResult:
    """Inference on the edited model; the input model is never mutated."""
    return infer(apply_edits(model, edits), params)
