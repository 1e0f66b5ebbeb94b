"""JSON documents for access structures and reports."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .core import AccessStructure, PlayerSet
from .errors import StructureError

log = logging.getLogger(__name__)


def structure_to_dict(gamma: AccessStructure) -> dict:
    return {
        "players": list(gamma.players),
        "minimal_authorized_sets": [s.names for s in gamma.minimal_sets],
    }


def structure_from_dict(doc: dict) -> AccessStructure:
    if not isinstance(doc, dict) or "players" not in doc or "minimal_authorized_sets" not in doc:
        raise StructureError('access structure JSON needs "players" and "minimal_authorized_sets"')
    players = doc["players"]
    if not all(isinstance(p, str) for p in players):
        raise StructureError("player names must be strings")
    sets = [PlayerSet.of(players, names) for names in doc["minimal_authorized_sets"]]
    if len({s.bits for s in sets}) < len(sets):
        log.warning("duplicate authorized sets removed")
    if not sets:
        raise StructureError("no authorized sets")
    return AccessStructure.from_masks(players, (s.bits for s in sets))


def load_structure(path: str | Path) -> AccessStructure:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StructureError(f"{path}: malformed JSON ({exc})") from exc
    return structure_from_dict(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
