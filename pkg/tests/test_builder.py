"""Graph builder: predicate mapping, evidence weights, search completeness,
retention rules, and the bundled fixture behaviors."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from cora.builder import (
    DEFAULT_LEXICON,
    BuildError,
    Lexicon,
    NullHeuristic,
    SearchParams,
    TrigramHeuristic,
    build_map,
    evidence_weight,
    map_predicate,
    merge_user_map,
)
from cora.inference import infer
from cora.kb import EventRecord, KnowledgeBase
from cora.model import validate
from generators import random_kb_dir
from oracles import oracle_build_paths, oracle_infer, path_key_set


def _event(predicate: str) -> EventRecord:
    return EventRecord("e", "a", predicate, "b")


class TestLexicon:
    def test_activates_is_direct_influence(self):
        spec = map_predicate(_event("activates"), Lexicon())
        assert (spec.kind, spec.polarity) == ("influence", "direct")

    def test_inhibits_is_inverse_influence(self):
        spec = map_predicate(_event("inhibits"), Lexicon())
        assert (spec.kind, spec.polarity) == ("influence", "inverse")

    def test_unmapped_predicate_returns_none(self):
        assert map_predicate(_event("correlates with"), Lexicon()) is None

    def test_lookup_case_folded(self):
        assert map_predicate(_event("  Activates "), Lexicon()) is not None

    def test_bad_entry_rejected(self):
        with pytest.raises(BuildError):
            Lexicon({"zaps": {"kind": "influence", "polarity": "sideways"}})


class TestEvidenceWeight:
    def test_single_event(self):
        assert evidence_weight([0.8]) == pytest.approx(0.8)

    def test_repetition_strengthens(self):
        assert evidence_weight([0.6, 0.6]) > evidence_weight([0.6])

    def test_caps(self):
        assert evidence_weight([1.0]) == 0.99
        assert evidence_weight([0.01]) == 0.1

    def test_formula(self):
        # n=2, mean=0.85 -> 1 - 0.15^2 = 0.9775
        assert evidence_weight([0.8, 0.9]) == pytest.approx(0.9775)

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=20))
    def test_weight_always_in_bounds(self, confidences):
        weight = evidence_weight(confidences)
        assert 0.1 <= weight <= 0.99

    @given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=1, max_value=10))
    def test_more_evidence_never_weakens(self, confidence, n):
        assert evidence_weight([confidence] * (n + 1)) >= evidence_weight([confidence] * n)


class TestHeuristics:
    def test_identity_is_zero(self):
        h = TrigramHeuristic()
        assert h.estimate("inflation", "inflation") == 0.0

    def test_symmetric(self):
        h = TrigramHeuristic()
        assert h.estimate("bond yields", "bond prices") == pytest.approx(
            h.estimate("bond prices", "bond yields")
        )

    def test_null_heuristic_zero_everywhere(self):
        assert NullHeuristic().estimate("x", "y") == 0.0

    def test_unknown_name_rejected(self, macro_kb):
        with pytest.raises(BuildError, match="unknown heuristic"):
            build_map(macro_kb, ["inflation"], "nominal bond yields",
                      params=SearchParams(heuristic="psychic"))


class TestBuildMap:
    def test_source_equals_target(self, macro_kb):
        result = build_map(macro_kb, ["nominal bond yields"], "nominal bond yields")
        assert len(result.model.nodes) == 1
        assert len(result.model.edges) == 0
        assert any("source equals target" in n for n in result.diagnostics.notes)
        assert result.model.scenario.assumptions == ()

    def test_unresolvable_target_errors(self, macro_kb):
        with pytest.raises(BuildError, match="cannot resolve target"):
            build_map(macro_kb, ["inflation"], "quantum flux")

    def test_unresolvable_source_errors(self, macro_kb):
        with pytest.raises(BuildError, match="cannot resolve source"):
            build_map(macro_kb, ["quantum flux"], "nominal bond yields")

    def test_alias_resolution_applies(self, macro_kb):
        via_alias = build_map(macro_kb, ["CPI inflation"], "bond yields")
        direct = build_map(macro_kb, ["inflation"], "nominal bond yields")
        assert via_alias.model == direct.model

    def test_unmapped_predicates_counted(self, macro_kb):
        result = build_map(macro_kb, ["inflation"], "nominal bond yields")
        assert result.diagnostics.unmapped_predicates.get("correlates with") == 1

    def test_every_edge_carries_evidence(self, macro_kb):
        result = build_map(
            macro_kb,
            [{"concept": "high inflation"},
             {"concept": "economic growth", "value": "decreasing"}],
            "nominal bond yields",
        )
        for edge in result.model.edges.values():
            assert edge.evidence or edge.template_derived

    def test_duplicate_evidence_merges_into_one_edge(self, macro_kb):
        result = build_map(macro_kb, ["inflation"], "nominal bond yields")
        edge = result.model.edges["inf:inflation->inflation expectations:direct"]
        assert len(edge.evidence) == 3
        # n=3, mean = (0.8 + 0.9 + 0.7)/3 = 0.8 -> 1 - 0.2^3 = 0.992 -> capped
        assert edge.weight == pytest.approx(0.99)

    def test_min_confidence_filters_events(self, macro_kb):
        loose = build_map(macro_kb, ["inflation"], "nominal bond yields")
        strict = build_map(
            macro_kb, ["inflation"], "nominal bond yields",
            params=SearchParams(min_confidence=0.99),
        )
        assert strict.diagnostics.merged_edges < loose.diagnostics.merged_edges
        assert strict.diagnostics.paths_found == 0

    def test_built_model_validates(self, macro_kb):
        result = build_map(
            macro_kb,
            [{"concept": "high inflation"},
             {"concept": "economic growth", "value": "decreasing"}],
            "nominal bond yields",
        )
        assert validate(result.model) == []

    def test_biomed_multihop_chain(self, biomed_kb):
        result = build_map(biomed_kb, ["IRAK4 inhibitor"], "RA")
        # a chain through intermediate signalling concepts, each hop evidenced
        assert result.diagnostics.paths_retained >= 1
        longest = max(result.diagnostics.retained_paths, key=len)
        assert len(longest) >= 4
        for edge_id in longest:
            assert result.model.edges[edge_id].evidence
        # matches the exhaustive oracle
        got = {tuple(p) for p in result.diagnostics.retained_paths}
        want = oracle_build_paths(
            KnowledgeBase.load(biomed_kb.path), ["irak4 inhibitor"],
            "rheumatoid arthritis", DEFAULT_LEXICON, max_hops=6,
        )
        assert got == want

    def test_conflicting_source_values_error(self, macro_kb):
        with pytest.raises(BuildError, match="conflicting values"):
            build_map(
                macro_kb,
                [{"concept": "economic growth", "value": "increasing"},
                 {"concept": "GDP growth", "value": "decreasing"}],
                "nominal bond yields",
            )

    def test_state_source_gets_active_value(self, macro_kb):
        result = build_map(macro_kb, ["high inflation"], "nominal bond yields")
        assert result.model.scenario.assumed("high inflation") == "active"


class TestSearchCompleteness:
    def test_random_kbs_match_exhaustive_dfs(self, tmp_path):
        rng = random.Random(50)
        for i in range(20):
            kb_dir, sources, target = random_kb_dir(rng, tmp_path / f"kb{i}", max_events=120)
            kb = KnowledgeBase.load(kb_dir)
            params = SearchParams(max_hops=4)
            result = build_map(kb, sources, target, params=params)
            got = {tuple(p) for p in result.diagnostics.retained_paths}
            want = oracle_build_paths(
                KnowledgeBase.load(kb_dir), sources, target, DEFAULT_LEXICON, max_hops=4
            )
            assert got == want, f"kb seed iteration {i}"

    def test_null_heuristic_same_path_set(self, macro_kb):
        default = build_map(
            macro_kb,
            ["high inflation", {"concept": "economic growth", "value": "decreasing"}],
            "nominal bond yields",
        )
        null = build_map(
            macro_kb,
            ["high inflation", {"concept": "economic growth", "value": "decreasing"}],
            "nominal bond yields",
            params=SearchParams(heuristic="null"),
        )
        assert {tuple(p) for p in default.diagnostics.retained_paths} == {
            tuple(p) for p in null.diagnostics.retained_paths
        }
        assert default.model == null.model


class TestRetention:
    def test_top_k_limits_per_source(self, macro_kb):
        unlimited = build_map(macro_kb, ["inflation"], "nominal bond yields")
        limited = build_map(
            macro_kb, ["inflation"], "nominal bond yields",
            params=SearchParams(top_k=1),
        )
        assert limited.diagnostics.paths_retained <= 1
        assert unlimited.diagnostics.paths_retained > limited.diagnostics.paths_retained

    def test_subpath_suppression(self, tmp_path):
        # growth -> tax revenue directly and growth -> earnings -> tax revenue:
        # the 1-hop path's node sequence is a subsequence of the 2-hop one.
        import json

        kb_dir = tmp_path / "kb"
        kb_dir.mkdir()
        events = [
            {"event_id": "e1", "subject": "growth", "predicate": "fuels",
             "object": "tax revenue", "doc_id": "d", "passage": "p", "confidence": 0.9},
            {"event_id": "e2", "subject": "growth", "predicate": "boosts",
             "object": "earnings", "doc_id": "d", "passage": "p", "confidence": 0.9},
            {"event_id": "e3", "subject": "earnings", "predicate": "raises",
             "object": "tax revenue", "doc_id": "d", "passage": "p", "confidence": 0.9},
        ]
        (kb_dir / "events.jsonl").write_text(
            "\n".join(json.dumps(e) for e in events) + "\n", encoding="utf-8"
        )
        kb = KnowledgeBase.load(kb_dir)
        result = build_map(kb, ["growth"], "tax revenue")
        retained = {tuple(p) for p in result.diagnostics.retained_paths}
        assert retained == {("inf:growth->earnings:direct", "inf:earnings->tax revenue:direct")}

    def test_parallel_polarities_both_retained(self, tmp_path):
        import json

        kb_dir = tmp_path / "kb"
        kb_dir.mkdir()
        events = [
            {"event_id": "e1", "subject": "a", "predicate": "raises",
             "object": "t", "doc_id": "d1", "passage": "supports", "confidence": 0.8},
            {"event_id": "e2", "subject": "a", "predicate": "reduces",
             "object": "t", "doc_id": "d2", "passage": "refutes", "confidence": 0.8},
        ]
        (kb_dir / "events.jsonl").write_text(
            "\n".join(json.dumps(e) for e in events) + "\n", encoding="utf-8"
        )
        kb = KnowledgeBase.load(kb_dir)
        result = build_map(kb, ["a"], "t")
        assert {tuple(p) for p in result.diagnostics.retained_paths} == {
            ("inf:a->t:direct",), ("inf:a->t:inverse",)
        }
        # inference then surfaces both pressures
        run = infer(result.model)
        assert {p.sign for p in run.paths} == {"+", "-"}


class TestMacroScenario:
    def test_macro_query_has_both_pressures(self, macro_kb):
        result = build_map(
            macro_kb,
            [{"concept": "high inflation"},
             {"concept": "economic growth", "value": "decreasing"}],
            "nominal bond yields",
        )
        run = infer(result.model)
        upward = [p for p in run.paths if p.sign == "+"]
        downward = [p for p in run.paths if p.sign == "-"]
        assert upward and downward
        assert "Upward pressures:" in run.explanation
        assert "Downward pressures:" in run.explanation
        # masses agree with the enumeration oracle
        expected = oracle_infer(result.model)
        assert run.verdict.upward_mass == pytest.approx(expected["U"], abs=1e-9)
        assert run.verdict.downward_mass == pytest.approx(expected["D"], abs=1e-9)
        assert {(p.source, p.hops, p.sign) for p in run.paths} == path_key_set(
            expected["paths"]
        )


class TestMergeUserMap:
    def test_user_edge_wins_on_conflict(self, macro_kb):
        built = build_map(macro_kb, ["inflation"], "nominal bond yields").model
        from dataclasses import replace

        edge = built.influences[0]
        user = replace(
            built,
            influences=(replace(edge, weight=0.42),) ,
            triggers=(),
        )
        merged, notes = merge_user_map(built, user)
        assert merged.edges[edge.edge_id].weight == 0.42
        assert any("overrides" in n for n in notes)
        assert validate(merged) == []
