"""Shared helpers: label normalization and canonical JSON."""

from __future__ import annotations

import json
import re
from typing import Any

_WHITESPACE = re.compile(r"\s+")


def normalize_label(label: str) -> str:
    """Canonicalize a surface label: case-fold, trim, collapse whitespace."""
    return _WHITESPACE.sub(" ", label.strip()).casefold()


def canonical_json(obj: Any) -> str:
    """Byte-stable JSON: sorted keys, compact separators, no ASCII escaping."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
