"""Independent oracles used to check the engine, the builder, and edits.

Everything here is written as plainly as possible: flat edge-list scans,
recursive enumeration, dict manipulation.  None of it shares code with the
implementations it checks.
"""

from __future__ import annotations

import functools
import math

from cora.model import CausalModel
from cora.util import normalize_label

# ---------------------------------------------------------------------------
# Inference oracle: naive enumerate-all-simple-paths


def oracle_infer(model: CausalModel, tau: float = 0.05, max_len: int = 6) -> dict:
    """Reference semantics by brute-force enumeration.

    Returns {"paths": [(source, hops, sign, strength)...], "U", "D",
    "direction", "contradictions": {(members, ((node, chains)...))}}.
    """
    scenario = model.scenario
    assert scenario is not None and scenario.target is not None
    target = scenario.target
    assumed = {a.node: a.value for a in scenario.assumptions}
    state_ids = {s.id for s in model.states}

    activate_edges = [t for t in model.triggers if t.effect == "activate"]
    setdir_edges = [t for t in model.triggers if t.effect in ("increase", "decrease")]

    # state -> [(origin, chain edge ids, weight product)]
    chains: dict[str, list[tuple[str, tuple[str, ...], float]]] = {}

    def walk(origin: str, node: str, chain: list[str], weight: float, visited: set[str]):
        chains.setdefault(node, []).append((origin, tuple(chain), weight))
        for trg in activate_edges:
            if trg.source != node:
                continue
            if trg.target in visited or trg.target in assumed:
                continue
            walk(origin, trg.target, chain + [trg.edge_id], weight * trg.weight,
                 visited | {trg.target})

    for node in sorted(assumed):
        if node in state_ids and assumed[node] == "active":
            walk(node, node, [], 1.0, {node})

    # pressure sources: (origin, prefix chain, entry quantity, direction, strength)
    sources: list[tuple[str, tuple[str, ...], str, str, float]] = []
    for node in sorted(assumed):
        if node not in state_ids and assumed[node] in ("increasing", "decreasing"):
            sources.append((node, (), node, assumed[node], 1.0))
    for trg in sorted(setdir_edges, key=lambda t: t.edge_id):
        direction = "increasing" if trg.effect == "increase" else "decreasing"
        for origin, chain, weight in chains.get(trg.source, []):
            if trg.target in assumed:
                continue
            sources.append(
                (origin, chain + (trg.edge_id,), trg.target, direction, weight * trg.weight)
            )

    influence_list = sorted(model.influences, key=lambda e: e.edge_id)
    paths: list[tuple[str, tuple[str, ...], str, float]] = []

    def enumerate_paths(origin, prefix, entry, direction, strength0):
        base_sign = 1 if direction == "increasing" else -1
        if entry == target:
            if prefix:
                paths.append((origin, prefix, "+" if base_sign > 0 else "-", strength0))
            return

        def rec(node, edges, visited):
            if node == target:
                sign = base_sign
                strength = strength0
                for edge_id in edges:
                    edge = model.edges[edge_id]
                    strength = strength * edge.weight
                    if edge.polarity == "inverse":
                        sign = -sign
                paths.append((origin, prefix + tuple(edges),
                              "+" if sign > 0 else "-", strength))
                return
            if node != entry and node in assumed:
                return
            if len(edges) >= max_len:
                return
            for inf in influence_list:
                if inf.source != node or inf.target in visited:
                    continue
                rec(inf.target, edges + [inf.edge_id], visited | {inf.target})

        rec(entry, [], {entry})

    for origin, prefix, entry, direction, strength0 in sources:
        enumerate_paths(origin, prefix, entry, direction, strength0)

    upward = math.fsum(s for _, _, sign, s in paths if sign == "+")
    downward = math.fsum(s for _, _, sign, s in paths if sign == "-")

    active = set(chains)
    contradictions = set()
    for mutex in model.mutexes:
        violating = tuple(sorted(m for m in mutex.members if m in active))
        if len(violating) >= 2:
            derivations = tuple(
                (member, frozenset(chain for _, chain, _ in chains[member]))
                for member in violating
            )
            contradictions.add((violating, derivations))

    total = upward + downward
    if total > 0:
        u, d = upward / total, downward / total
        if u - d > tau:
            direction = "increasing"
        elif d - u > tau:
            direction = "decreasing"
        else:
            direction = "ambiguous"
    else:
        direction = "steady" if not contradictions else "ambiguous"

    return {
        "paths": paths,
        "U": upward,
        "D": downward,
        "direction": direction,
        "contradictions": contradictions,
    }


def path_key_set(paths) -> set:
    return {(source, hops, sign) for source, hops, sign, _ in paths}


# ---------------------------------------------------------------------------
# Builder oracle: exhaustive DFS over an independently assembled edge graph


def oracle_build_paths(
    kb, sources: list[str], target: str, lexicon_entries: dict,
    max_hops: int, min_confidence: float = 0.0, top_k: int | None = None,
) -> set[tuple[str, ...]]:
    """Reference path set for build_map on the same inputs."""
    # predicate table, case-folded
    table = {normalize_label(k): v for k, v in lexicon_entries.items()}

    support: dict[tuple, list] = {}
    for event_id in sorted(kb.events):
        event = kb.events[event_id]
        if event.confidence < min_confidence:
            continue
        entry = table.get(normalize_label(event.predicate))
        if entry is None:
            continue
        flavor = entry.get("polarity") or entry.get("effect")
        key = (
            kb.resolve(event.subject, create_if_missing=True),
            kb.resolve(event.object, create_if_missing=True),
            entry["kind"],
            flavor,
        )
        support.setdefault(key, []).append(event)

    kinds: dict[str, str] = {}
    edges: dict[str, dict] = {}
    for key in sorted(support):
        src, tgt, kind, flavor = key
        if kind == "influence":
            wanted = [(src, "quantity"), (tgt, "quantity")]
        elif flavor == "activate":
            wanted = [(src, "state"), (tgt, "state")]
        else:
            wanted = [(src, "state"), (tgt, "quantity")]
        if any(kinds.get(node, want) != want for node, want in wanted):
            continue
        for node, want in wanted:
            kinds[node] = want
        events = support[key]
        mean = sum(e.confidence for e in events) / len(events)
        weight = 1.0 - (1.0 - mean) ** len(events)
        weight = min(max(weight, 0.1), 0.99)
        prefix = "inf" if kind == "influence" else "trg"
        edge_id = f"{prefix}:{src}->{tgt}:{flavor}"
        edges[edge_id] = {"source": src, "target": tgt, "weight": weight}

    all_paths: list[tuple[str, ...]] = []

    def dfs(node, used, visited):
        if node == target and used:
            all_paths.append(tuple(used))
            return
        if len(used) >= max_hops:
            return
        for edge_id in sorted(edges):
            edge = edges[edge_id]
            if edge["source"] != node or edge["target"] in visited:
                continue
            dfs(edge["target"], used + [edge_id], visited | {edge["target"]})

    for source in sorted(set(sources)):
        if source == target:
            continue
        dfs(source, [], {source})

    # retention: per source, strength order with tie-prefers-longer, then
    # drop strict node-subsequence paths
    def strength(path):
        value = 1.0
        for edge_id in path:
            value *= edges[edge_id]["weight"]
        return value

    def nodes_of(path):
        seq = [edges[path[0]]["source"]]
        for edge_id in path:
            seq.append(edges[edge_id]["target"])
        return tuple(seq)

    def subseq(short, long):
        if len(short) >= len(long):
            return False
        i = 0
        for item in long:
            if i < len(short) and short[i] == item:
                i += 1
        return i == len(short)

    retained: set[tuple[str, ...]] = set()
    by_source: dict[str, list] = {}
    for path in all_paths:
        by_source.setdefault(edges[path[0]]["source"], []).append(path)
    for source, group in by_source.items():
        def cmp(p, q):
            sp, sq = strength(p), strength(q)
            if abs(sp - sq) <= 1e-6:
                if len(p) != len(q):
                    return -1 if len(p) > len(q) else 1
                return -1 if p < q else (1 if p > q else 0)
            return -1 if sp > sq else 1

        ordered = sorted(sorted(group), key=functools.cmp_to_key(cmp))
        if top_k is not None:
            ordered = ordered[:top_k]
        for p in ordered:
            if not any(
                q is not p and subseq(nodes_of(p), nodes_of(q)) for q in ordered
            ):
                retained.add(p)
    return retained


# ---------------------------------------------------------------------------
# Edit oracle: apply an edit list directly to a MapDocument dict


def oracle_apply_edits(document: dict, edits: list[dict]) -> dict:
    """Reference edit application, working purely on the JSON document."""
    import copy

    doc = copy.deepcopy(document)

    def find_edge(edge_id):
        for edge in doc["edges"]:
            if edge["id"] == edge_id:
                return edge
        raise AssertionError(f"edge {edge_id} missing")

    for edit in edits:
        op = edit["op"]
        if op == "set_weight":
            find_edge(edit["edge"])["weight"] = edit["weight"]
        elif op == "remove_edge":
            doc["edges"] = [e for e in doc["edges"] if e["id"] != edit["edge"]]
        elif op == "add_edge":
            spec = dict(edit["spec"])
            kind = spec["kind"]
            flavor = spec.get("polarity") if kind == "influence" else spec.get("effect")
            prefix = "inf" if kind == "influence" else "trg"
            edge = {
                "id": spec.get("id") or f"{prefix}:{spec['source']}->{spec['target']}:{flavor}",
                "source": spec["source"],
                "target": spec["target"],
                "kind": kind,
                "weight": spec.get("weight", 0.5),
                "evidence": spec.get("evidence", []),
            }
            if kind == "influence":
                edge["polarity"] = flavor
            else:
                edge["effect"] = flavor
            doc["edges"].append(edge)
        elif op == "add_node":
            spec = dict(edit["spec"])
            node = {
                "id": spec.get("id") or normalize_label(spec["label"]),
                "label": spec["label"],
                "kind": spec["kind"],
            }
            if spec.get("type") is not None:
                node["type"] = spec["type"]
            if spec.get("linked_quantity") is not None:
                node["linked_quantity"] = spec["linked_quantity"]
            doc["nodes"].append(node)
        elif op == "remove_node":
            node_id = edit["node"]
            doc["nodes"] = [n for n in doc["nodes"] if n["id"] != node_id]
            for node in doc["nodes"]:
                if node.get("linked_quantity") == node_id:
                    del node["linked_quantity"]
            doc["edges"] = [
                e for e in doc["edges"] if node_id not in (e["source"], e["target"])
            ]
            doc["mutexes"] = [
                [m for m in mutex if m != node_id]
                for mutex in doc["mutexes"]
            ]
            doc["mutexes"] = [m for m in doc["mutexes"] if len(m) >= 2]
            if doc.get("scenario"):
                doc["scenario"]["assumptions"] = [
                    a for a in doc["scenario"]["assumptions"] if a["node"] != node_id
                ]
        elif op == "clamp":
            if not doc.get("scenario"):
                doc["scenario"] = {"assumptions": [], "target": None}
            doc["scenario"]["assumptions"] = [
                a for a in doc["scenario"]["assumptions"] if a["node"] != edit["node"]
            ] + [{"node": edit["node"], "value": edit["value"]}]
        elif op == "unclamp":
            doc["scenario"]["assumptions"] = [
                a for a in doc["scenario"]["assumptions"] if a["node"] != edit["node"]
            ]
        else:
            raise AssertionError(f"unknown op {op}")
    return doc
