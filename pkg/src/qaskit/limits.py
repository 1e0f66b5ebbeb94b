"""Size bounds shared by all modules.

Defaults can be overridden with the ``QASKIT_LIMITS`` environment variable,
a comma separated list of ``key=value`` pairs, e.g.
``QASKIT_LIMITS="support=2000000,enumeration=22"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import SizeLimitError


@dataclass(frozen=True)
class Limits:
    players: int = 24  # representable universe size
    enumeration: int = 20  # max n for 2**n sweeps
    extensions: int = 6  # max n for all_maximal_extensions
    decomposition: int = 16  # max r for subset DP
    support: int = 1_000_000  # sparse amplitude map entries
    dense: int = 1_000_000  # dense state vector entries
    verify_players: int = 10  # exhaustive qsim sweeps
    scheme_players: int = 12  # exhaustive scheme II sweeps


def _from_env() -> Limits:
    raw = os.environ.get("QASKIT_LIMITS", "").strip()
    if not raw:
        return Limits()
    known = {f.name for f in fields(Limits)}
    updates = {}
    for item in raw.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in known:
            raise SizeLimitError(f"QASKIT_LIMITS: unknown key {key!r} (known: {sorted(known)})")
        updates[key] = int(value)
    return replace(Limits(), **updates)


LIMITS = _from_env()


def check(name: str, value: int, bound: int | None = None) -> None:
    bound = getattr(LIMITS, name) if bound is None else bound
    if value > bound:
        raise SizeLimitError(f"{name} limit exceeded: {value} > {bound}")
