"""Seeded random generators for models, edit sets, and knowledge bases."""

from __future__ import annotations

import random

from cora.builder import DEFAULT_LEXICON
from cora.model import (
    Assumption,
    CausalModel,
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

WEIGHT_CHOICES = [round(0.1 * i, 1) for i in range(1, 11)]


def random_model(
    rng: random.Random,
    max_nodes: int = 12,
    max_edges: int = 25,
    max_mutexes: int = 2,
    allow_steady: bool = True,
) -> CausalModel:
    """A valid random model with a scenario; target is never assumed."""
    n_quantities = rng.randint(2, max(2, max_nodes - 4))
    n_states = rng.randint(0, min(4, max_nodes - n_quantities))
    quantities = [Quantity(f"q{i}", f"q{i}") for i in range(n_quantities)]
    states = [State(f"s{i}", f"s{i}") for i in range(n_states)]

    influences: dict[str, Influence] = {}
    triggers: dict[str, Trigger] = {}
    n_edges = rng.randint(1, max_edges)
    for _ in range(n_edges):
        weight = rng.choice(WEIGHT_CHOICES)
        if states and rng.random() < 0.3:
            source = rng.choice(states).id
            if len(states) > 1 and rng.random() < 0.5:
                target = rng.choice([s for s in states if s.id != source]).id
                effect = "activate"
            else:
                target = rng.choice(quantities).id
                effect = rng.choice(["increase", "decrease"])
            edge_id = trigger_id(source, target, effect)
            if edge_id in triggers:
                continue
            triggers[edge_id] = Trigger(edge_id, source, target, effect, weight)
        else:
            source, target = rng.sample([q.id for q in quantities], 2)
            polarity = rng.choice(["direct", "inverse"])
            edge_id = influence_id(source, target, polarity)
            if edge_id in influences:
                continue
            influences[edge_id] = Influence(edge_id, source, target, polarity, weight)

    mutexes = []
    if len(states) >= 2:
        for _ in range(rng.randint(0, max_mutexes)):
            size = rng.randint(2, min(3, len(states)))
            members = tuple(s.id for s in rng.sample(states, size))
            mutexes.append(MutexConstraint(members))
    mutexes = list({m.members: m for m in mutexes}.values())

    target = rng.choice(quantities).id
    candidates = [q.id for q in quantities if q.id != target] + [s.id for s in states]
    rng.shuffle(candidates)
    assumptions = []
    for node in candidates[: rng.randint(1, min(3, len(candidates)))]:
        if node.startswith("s"):
            assumptions.append(Assumption(node, "active"))
        else:
            values = ["increasing", "decreasing"] + (["steady"] if allow_steady else [])
            assumptions.append(Assumption(node, rng.choice(values)))

    model = CausalModel(
        quantities=tuple(quantities),
        states=tuple(states),
        influences=tuple(influences.values()),
        triggers=tuple(triggers.values()),
        mutexes=tuple(mutexes),
        scenario=Scenario(tuple(assumptions), target),
    )
    assert validate(model) == []
    return model


def random_mutex_model(rng: random.Random) -> CausalModel:
    """A model guaranteed to violate at least one mutex constraint."""
    model = random_model(rng, max_nodes=10, max_edges=15, max_mutexes=0)
    extra_states = [State(f"m{i}", f"m{i}") for i in range(rng.randint(2, 3))]
    states = model.states + tuple(extra_states)
    mutex = MutexConstraint(tuple(s.id for s in extra_states))
    scenario = model.scenario
    assert scenario is not None
    if rng.random() < 0.5:
        # both members assumed outright
        assumptions = scenario.assumptions + tuple(
            Assumption(s.id, "active") for s in extra_states[:2]
        )
        triggers = model.triggers
    else:
        # first assumed, second reached over a trigger chain
        assumptions = scenario.assumptions + (Assumption(extra_states[0].id, "active"),)
        edge_id = trigger_id(extra_states[0].id, extra_states[1].id, "activate")
        triggers = model.triggers + (
            Trigger(edge_id, extra_states[0].id, extra_states[1].id, "activate",
                    rng.choice(WEIGHT_CHOICES)),
        )
    model = CausalModel(
        quantities=model.quantities,
        states=states,
        influences=model.influences,
        triggers=triggers,
        mutexes=model.mutexes + (mutex,),
        scenario=Scenario(assumptions, scenario.target),
    )
    assert validate(model) == []
    return model


def random_edits(rng: random.Random, model: CausalModel, count: int | None = None) -> list[dict]:
    """A raw edit list valid against the model (applied in order)."""
    from cora import inference
    from cora.model import to_json

    edits: list[dict] = []
    current = model
    for _ in range(count if count is not None else rng.randint(1, 5)):
        document = to_json(current)
        edge_ids = [e["id"] for e in document["edges"]]
        node_ids = [n["id"] for n in document["nodes"]]
        quantity_ids = [n["id"] for n in document["nodes"] if n["kind"] == "quantity"]
        target = document["scenario"]["target"] if document["scenario"] else None
        assumed = (
            [a["node"] for a in document["scenario"]["assumptions"]]
            if document["scenario"] else []
        )
        choices = ["set_weight", "remove_edge", "add_edge", "add_node", "clamp"]
        if assumed:
            choices.append("unclamp")
        removable = [n for n in node_ids if n != target]
        if removable:
            choices.append("remove_node")
        op = rng.choice(choices)
        edit: dict | None = None
        if op == "set_weight" and edge_ids:
            edit = {"op": "set_weight", "edge": rng.choice(edge_ids),
                    "weight": rng.choice(WEIGHT_CHOICES)}
        elif op == "remove_edge" and edge_ids:
            edit = {"op": "remove_edge", "edge": rng.choice(edge_ids)}
        elif op == "add_edge" and len(quantity_ids) >= 2:
            source, tgt = rng.sample(quantity_ids, 2)
            polarity = rng.choice(["direct", "inverse"])
            edge_id = f"inf:{source}->{tgt}:{polarity}"
            if edge_id not in edge_ids:
                edit = {"op": "add_edge", "spec": {
                    "source": source, "target": tgt, "kind": "influence",
                    "polarity": polarity, "weight": rng.choice(WEIGHT_CHOICES),
                }}
        elif op == "add_node":
            label = f"extra{rng.randint(0, 10_000)}"
            if label not in node_ids:
                edit = {"op": "add_node", "spec": {"label": label, "kind": "quantity"}}
        elif op == "clamp":
            clampable = [n for n in node_ids if n != target]
            if clampable:
                node = rng.choice(clampable)
                kind = next(n["kind"] for n in document["nodes"] if n["id"] == node)
                value = "active" if kind == "state" else rng.choice(
                    ["increasing", "decreasing", "steady"]
                )
                edit = {"op": "clamp", "node": node, "value": value}
        elif op == "unclamp" and assumed:
            edit = {"op": "unclamp", "node": rng.choice(assumed)}
        elif op == "remove_node" and removable:
            edit = {"op": "remove_node", "node": rng.choice(removable)}
        if edit is None:
            continue
        try:
            current = inference.apply_edits(current, inference.parse_edits([edit]))
        except inference.EditRejection:
            continue
        edits.append(edit)
    return edits


CONCEPTS = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lam", "mu", "nu", "xi", "omicron", "pi", "rho", "sigma",
]


def random_kb_dir(rng: random.Random, tmp_path, max_events: int = 200):
    """Write a random KB directory; returns (path, sources, target)."""
    import json

    concepts = CONCEPTS[: rng.randint(6, len(CONCEPTS))]
    predicates = sorted(DEFAULT_LEXICON) + ["correlates with", "relates to"]
    kb_dir = tmp_path
    kb_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    used: set[str] = set()
    for i in range(rng.randint(10, max_events)):
        subject, obj = rng.sample(concepts, 2)
        used.add(subject)
        used.add(obj)
        record = {
            "event_id": f"r{i:04d}",
            "subject": subject,
            "predicate": rng.choice(predicates),
            "object": obj,
            "doc_id": f"doc{rng.randint(0, 30)}",
            "passage": f"{subject} affects {obj}.",
            "confidence": rng.choice([0.3, 0.5, 0.7, 0.9, 1.0]),
        }
        lines.append(json.dumps(record))
    (kb_dir / "events.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (kb_dir / "aliases.json").write_text("{}", encoding="utf-8")
    (kb_dir / "types.json").write_text("{}", encoding="utf-8")
    (kb_dir / "lexicon.json").write_text(json.dumps(DEFAULT_LEXICON), encoding="utf-8")

    resolvable = sorted(used)
    target = rng.choice(resolvable)
    n_sources = rng.randint(1, min(3, len(resolvable)))
    sources = rng.sample(resolvable, n_sources)
    return kb_dir, sources, target
