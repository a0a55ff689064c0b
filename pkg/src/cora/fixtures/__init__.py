"""Bundled demonstration knowledge bases."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

FIXTURE_NAMES = ("macro_econ", "biomed")


def fixture_path(name: str) -> Path:
    """Directory of a bundled KB; usable directly as a kb_path."""
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture '{name}' (have: {FIXTURE_NAMES})")
    return Path(str(files(__package__).joinpath(name)))
