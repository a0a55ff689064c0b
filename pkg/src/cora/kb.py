"""Knowledge store: event records, alias resolution, type hierarchy, neighborhood queries.

A knowledge base is a directory:

    events.jsonl   one event record per line
    aliases.json   surface label -> canonical label
    types.json     type label -> list of parent type labels
    lexicon.json   predicate -> edge mapping (consumed by the graph builder)

Loaded knowledge bases are immutable snapshots; the concept index is derived
in memory at load and never persisted.  Ingestion appends to events.jsonl and
requires a fresh load to become visible.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .util import normalize_label

logger = logging.getLogger(__name__)

QUALIFIER_KINDS = ("time", "space", "manner", "purpose")

EVENT_FIELDS = {
    "event_id",
    "subject",
    "subject_type",
    "predicate",
    "object",
    "object_type",
    "qualifiers",
    "doc_id",
    "passage",
    "confidence",
}


class KnowledgeBaseError(Exception):
    """Raised for unloadable or unwritable knowledge bases."""


@dataclass
class EventRecord:
    """One extracted contextual relationship with its evidence passage."""

    event_id: str
    subject: str
    predicate: str
    object: str
    subject_type: str | None = None
    object_type: str | None = None
    qualifiers: dict[str, str] = field(default_factory=dict)
    doc_id: str = ""
    passage: str = ""
    confidence: float = 1.0

    def to_dict(self) -> dict:
        out: dict = {
            "event_id": self.event_id,
            "subject": self.subject,
            "predicate": self.predicate,
            "object": self.object,
        }
        if self.subject_type is not None:
            out["subject_type"] = self.subject_type
        if self.object_type is not None:
            out["object_type"] = self.object_type
        if self.qualifiers:
            out["qualifiers"] = dict(self.qualifiers)
        out["doc_id"] = self.doc_id
        out["passage"] = self.passage
        out["confidence"] = self.confidence
        return out


def check_event(raw: dict) -> str | None:
    """Return a rejection reason for a raw event dict, or None if acceptable."""
    if not isinstance(raw, dict):
        return "record is not a JSON object"
    for name in ("event_id", "subject", "predicate", "object"):
        value = raw.get(name)
        if value is None:
            return f"missing {name}"
        if not isinstance(value, str) or not value.strip():
            return f"empty {name}"
    qualifiers = raw.get("qualifiers", {})
    if not isinstance(qualifiers, dict):
        return "qualifiers must be an object"
    for kind, text in qualifiers.items():
        if kind not in QUALIFIER_KINDS:
            return f"unknown qualifier kind '{kind}'"
        if not isinstance(text, str):
            return f"qualifier '{kind}' must be text"
    confidence = raw.get("confidence", 1.0)
    if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
        return "confidence must be a number"
    if not 0.0 <= float(confidence) <= 1.0:
        return f"confidence {confidence} outside [0,1]"
    return None


def event_from_dict(raw: dict) -> EventRecord:
    """Build an EventRecord from a checked dict, ignoring unknown fields."""
    unknown = set(raw) - EVENT_FIELDS
    if unknown:
        logger.warning("ignoring unknown event fields: %s", ", ".join(sorted(unknown)))
    return EventRecord(
        event_id=raw["event_id"],
        subject=raw["subject"],
        predicate=raw["predicate"],
        object=raw["object"],
        subject_type=raw.get("subject_type"),
        object_type=raw.get("object_type"),
        qualifiers=dict(raw.get("qualifiers", {})),
        doc_id=raw.get("doc_id", ""),
        passage=raw.get("passage", ""),
        confidence=float(raw.get("confidence", 1.0)),
    )


class AliasTable:
    """Surface label -> canonical concept id, idempotent under resolution."""

    def __init__(self, entries: dict[str, str] | None = None):
        self.entries: dict[str, str] = {}
        for surface, canonical in (entries or {}).items():
            self.add(surface, canonical)

    def add(self, surface: str, canonical: str) -> None:
        surface_n = normalize_label(surface)
        canonical_n = normalize_label(canonical)
        existing = self.entries.get(surface_n)
        if existing is not None and existing != canonical_n:
            raise KnowledgeBaseError(
                f"alias conflict: '{surface_n}' maps to both '{existing}' and '{canonical_n}'"
            )
        self.entries[surface_n] = canonical_n
        # Canonical ids must map to themselves so resolution is idempotent.
        target = self.entries.get(canonical_n)
        if target is None:
            self.entries[canonical_n] = canonical_n
        elif target != canonical_n:
            raise KnowledgeBaseError(
                f"alias chain: canonical '{canonical_n}' is itself aliased to '{target}'"
            )

    def resolve(self, label: str, create_if_missing: bool = False) -> str | None:
        """Resolve a surface label to its canonical concept id.

        Unknown labels return None unless create_if_missing is set, in which
        case the normalized label is minted as its own canonical id.
        """
        normalized = normalize_label(label)
        found = self.entries.get(normalized)
        if found is not None:
            return found
        if create_if_missing:
            self.entries[normalized] = normalized
            return normalized
        return None

    def snapshot(self) -> dict[str, str]:
        return dict(self.entries)


def resolve_concept(
    label: str, aliases: AliasTable, create_if_missing: bool = False
) -> str | None:
    return aliases.resolve(label, create_if_missing=create_if_missing)


class TypeHierarchy:
    """Acyclic type -> parents map supporting ancestor queries."""

    def __init__(self, parents: dict[str, list[str]] | None = None):
        self.parents: dict[str, tuple[str, ...]] = {
            t: tuple(ps) for t, ps in (parents or {}).items()
        }
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        # Iterative DFS with colors; a back edge means a cycle.
        WHITE, GRAY, BLACK = 0, 1, 2
        color: dict[str, int] = {}
        for start in self.parents:
            if color.get(start, WHITE) != WHITE:
                continue
            stack: list[tuple[str, Iterator[str]]] = [(start, iter(self.parents.get(start, ())))]
            color[start] = GRAY
            while stack:
                node, it = stack[-1]
                advanced = False
                for parent in it:
                    state = color.get(parent, WHITE)
                    if state == GRAY:
                        raise KnowledgeBaseError(
                            f"type hierarchy cycle through '{parent}'"
                        )
                    if state == WHITE:
                        color[parent] = GRAY
                        stack.append((parent, iter(self.parents.get(parent, ()))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()

    def ancestors(self, type_label: str) -> set[str]:
        seen: set[str] = set()
        frontier = list(self.parents.get(type_label, ()))
        while frontier:
            t = frontier.pop()
            if t in seen:
                continue
            seen.add(t)
            frontier.extend(self.parents.get(t, ()))
        return seen

    def is_same_or_descendant(self, child: str, ancestor: str) -> bool:
        return child == ancestor or ancestor in self.ancestors(child)

    def snapshot(self) -> dict[str, list[str]]:
        return {t: list(ps) for t, ps in self.parents.items()}


@dataclass
class RejectedRecord:
    line: int
    reason: str


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    rejection_reasons: list[RejectedRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejection_reasons": [
                {"line": r.line, "reason": r.reason} for r in self.rejection_reasons
            ],
        }


class KnowledgeBase:
    """Immutable snapshot of a knowledge base directory.

    The concept index (outgoing/incoming event ids per canonical concept) is
    rebuilt from events.jsonl on every load, so index contents always equal a
    full rescan.
    """

    def __init__(
        self,
        path: Path | None,
        events: list[EventRecord],
        aliases: AliasTable,
        types: TypeHierarchy,
        lexicon_data: dict | None = None,
    ):
        self.path = path
        self.events: dict[str, EventRecord] = {}
        self.aliases = aliases
        self.types = types
        self.lexicon_data = dict(lexicon_data or {})
        self.outgoing: dict[str, set[str]] = {}
        self.incoming: dict[str, set[str]] = {}
        self.concept_types: dict[str, set[str]] = {}
        for record in events:
            self._index(record)

    def _index(self, record: EventRecord) -> None:
        self.events[record.event_id] = record
        subject = self.aliases.resolve(record.subject, create_if_missing=True)
        obj = self.aliases.resolve(record.object, create_if_missing=True)
        self.outgoing.setdefault(subject, set()).add(record.event_id)
        self.incoming.setdefault(obj, set()).add(record.event_id)
        if record.subject_type:
            self.concept_types.setdefault(subject, set()).add(record.subject_type)
        if record.object_type:
            self.concept_types.setdefault(obj, set()).add(record.object_type)

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        path = Path(path)
        if not path.is_dir():
            raise KnowledgeBaseError(f"knowledge base directory not found: {path}")
        aliases = AliasTable(_read_json(path / "aliases.json", {}))
        types = TypeHierarchy(_read_json(path / "types.json", {}))
        lexicon_data = _read_json(path / "lexicon.json", {})
        events: list[EventRecord] = []
        seen_ids: set[str] = set()
        events_path = path / "events.jsonl"
        if events_path.exists():
            with events_path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        raw = json.loads(line)
                    except json.JSONDecodeError:
                        logger.warning("%s:%d: skipping invalid JSON", events_path, lineno)
                        continue
                    reason = check_event(raw)
                    if reason is not None:
                        logger.warning("%s:%d: skipping record (%s)", events_path, lineno, reason)
                        continue
                    if raw["event_id"] in seen_ids:
                        logger.warning(
                            "%s:%d: skipping duplicate event_id %s",
                            events_path, lineno, raw["event_id"],
                        )
                        continue
                    seen_ids.add(raw["event_id"])
                    events.append(event_from_dict(raw))
        return cls(path, events, aliases, types, lexicon_data)

    @property
    def event_count(self) -> int:
        return len(self.events)

    def resolve(self, label: str, create_if_missing: bool = False) -> str | None:
        return self.aliases.resolve(label, create_if_missing=create_if_missing)

    def concepts(self) -> list[str]:
        return sorted(set(self.outgoing) | set(self.incoming))

    def neighbors(self, concept: str, direction: str = "both") -> list[EventRecord]:
        """Events where the canonical concept is subject/object, sorted by event_id."""
        if direction not in ("outgoing", "incoming", "both"):
            raise ValueError(f"direction must be outgoing/incoming/both, got {direction!r}")
        canonical = self.aliases.resolve(concept)
        if canonical is None:
            canonical = normalize_label(concept)
        ids: set[str] = set()
        if direction in ("outgoing", "both"):
            ids |= self.outgoing.get(canonical, set())
        if direction in ("incoming", "both"):
            ids |= self.incoming.get(canonical, set())
        return [self.events[i] for i in sorted(ids)]

    def types_of(self, concept: str) -> set[str]:
        return set(self.concept_types.get(concept, set()))


def neighbors(concept: str, direction: str, kb: KnowledgeBase) -> list[EventRecord]:
    return kb.neighbors(concept, direction)


def init_kb(path: str | Path) -> Path:
    """Create an empty knowledge base directory (idempotent)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for name, default in (
        ("aliases.json", {}),
        ("types.json", {}),
        ("lexicon.json", {}),
    ):
        target = path / name
        if not target.exists():
            target.write_text(json.dumps(default, indent=2) + "\n", encoding="utf-8")
    events = path / "events.jsonl"
    if not events.exists():
        events.touch()
    return path


def ingest_events(
    records: Iterable[dict | str | EventRecord], kb_path: str | Path
) -> IngestReport:
    """Append acceptable event records to a knowledge base directory.

    Accepts parsed dicts, raw JSON lines, or EventRecord values.  Malformed
    records are counted and reported with their 1-based stream position;
    ingestion never aborts mid-stream.  Each accepted record is flushed
    before the next is examined, so a crash loses at most the current record.
    """
    kb_path = Path(kb_path)
    init_kb(kb_path)
    events_path = kb_path / "events.jsonl"
    if not os.access(kb_path, os.W_OK) or not os.access(events_path, os.W_OK):
        raise KnowledgeBaseError(f"knowledge base is not writable: {kb_path}")

    existing_ids: set[str] = set()
    with events_path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError:
                continue
            if isinstance(raw, dict) and isinstance(raw.get("event_id"), str):
                existing_ids.add(raw["event_id"])

    report = IngestReport()
    with events_path.open("a", encoding="utf-8") as out:
        for lineno, item in enumerate(records, start=1):
            raw: dict | None
            if isinstance(item, EventRecord):
                raw = item.to_dict()
            elif isinstance(item, str):
                try:
                    parsed = json.loads(item)
                except json.JSONDecodeError:
                    report.rejected += 1
                    report.rejection_reasons.append(RejectedRecord(lineno, "invalid JSON"))
                    continue
                raw = parsed if isinstance(parsed, dict) else None
                if raw is None:
                    report.rejected += 1
                    report.rejection_reasons.append(
                        RejectedRecord(lineno, "record is not a JSON object")
                    )
                    continue
            else:
                raw = item
            reason = check_event(raw)
            if reason is None and raw["event_id"] in existing_ids:
                reason = f"duplicate event_id '{raw['event_id']}'"
            if reason is not None:
                report.rejected += 1
                report.rejection_reasons.append(RejectedRecord(lineno, reason))
                continue
            record = event_from_dict(raw)
            out.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            out.flush()
            existing_ids.add(record.event_id)
            report.accepted += 1
    return report


def _read_json(path: Path, default):
    if not path.exists():
        return default
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise KnowledgeBaseError(f"invalid JSON in {path}: {exc}") from exc
