from __future__ import annotations

import json
from pathlib import Path

import pytest

from cora.dsl import parse_model
from cora.fixtures import fixture_path
from cora.kb import KnowledgeBase

FIXTURE_DIR = Path(__file__).parent / "fixtures"

DIAMOND_DSL = """\
quantity "A".
quantity "B".
quantity "C".
quantity "T".
"A" influences "B" directly with weight 0.8.
"B" influences "T" directly with weight 0.5.
"A" influences "C" directly with weight 0.9.
"C" influences "T" inversely with weight 0.9.
assume "A" increasing.
query "T".
"""


@pytest.fixture
def diamond_model():
    return parse_model(DIAMOND_DSL)


@pytest.fixture(scope="session")
def macro_kb() -> KnowledgeBase:
    return KnowledgeBase.load(fixture_path("macro_econ"))


@pytest.fixture(scope="session")
def biomed_kb() -> KnowledgeBase:
    return KnowledgeBase.load(fixture_path("biomed"))


@pytest.fixture
def tmp_kb(tmp_path) -> Path:
    """A small writable KB with three events out of 'inflation'."""
    kb_dir = tmp_path / "kb"
    kb_dir.mkdir()
    events = [
        {"event_id": "e1", "subject": "inflation", "predicate": "raises",
         "object": "bond yields", "doc_id": "d1", "passage": "p1", "confidence": 0.8},
        {"event_id": "e2", "subject": "inflation", "predicate": "erodes",
         "object": "currency value", "doc_id": "d2", "passage": "p2", "confidence": 0.7},
        {"event_id": "e3", "subject": "inflation", "predicate": "dampens",
         "object": "consumer spending", "doc_id": "d3", "passage": "p3", "confidence": 0.9},
        {"event_id": "e4", "subject": "growth", "predicate": "boosts",
         "object": "inflation", "doc_id": "d4", "passage": "p4", "confidence": 0.6},
    ]
    (kb_dir / "events.jsonl").write_text(
        "\n".join(json.dumps(e) for e in events) + "\n", encoding="utf-8"
    )
    (kb_dir / "aliases.json").write_text(
        json.dumps({"CPI": "inflation", "GDP growth": "growth"}), encoding="utf-8"
    )
    (kb_dir / "types.json").write_text("{}", encoding="utf-8")
    (kb_dir / "lexicon.json").write_text("{}", encoding="utf-8")
    return kb_dir


def dsl_corpus() -> list[Path]:
    return sorted((FIXTURE_DIR / "models").glob("*.dsl"))
