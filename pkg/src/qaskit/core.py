"""Player sets, access structures and the basic quantum/maximality tests.

Sets of players are bitmasks over an ordered label table. An access
structure is stored only through its minimal authorized sets; the monotone
closure is computed on demand and materialized only by the operations that
sweep all 2**n subsets.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import limits
from .errors import StructureError

log = logging.getLogger(__name__)


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits_of(x: int) -> list[int]:
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def set_key(mask: int) -> tuple[int, int]:
    """Sort key: smaller sets first, then bitmask value."""
    return popcount(mask), mask


@dataclass(frozen=True)
class PlayerSet:
    bits: int
    universe: tuple[str, ...]

    def __post_init__(self):
        if self.bits < 0 or self.bits >> len(self.universe):
            raise StructureError(f"bits {self.bits:#x} outside a universe of {len(self.universe)} players")

    @classmethod
    def of(cls, universe: Sequence[str], names: Iterable[str] | str) -> "PlayerSet":
        universe = tuple(universe)
        if isinstance(names, str):
            names = tokenize(names, universe)
        index = {p: i for i, p in enumerate(universe)}
        bits = 0
        for name in names:
            if name not in index:
                raise StructureError(f"unknown player {name!r}")
            bits |= 1 << index[name]
        return cls(bits, universe)

    @property
    def full(self) -> int:
        return (1 << len(self.universe)) - 1

    @property
    def names(self) -> list[str]:
        return [self.universe[i] for i in bits_of(self.bits)]

    @property
    def label(self) -> str:
        return "".join(self.names) or "{}"

    def complement(self) -> "PlayerSet":
        return PlayerSet(self.full & ~self.bits, self.universe)

    def _same(self, other: "PlayerSet") -> None:
        if self.universe != other.universe:
            raise StructureError("player sets over different universes")

    def issubset(self, other: "PlayerSet") -> bool:
        self._same(other)
        return self.bits & ~other.bits == 0

    def __and__(self, other: "PlayerSet") -> "PlayerSet":
        self._same(other)
        return PlayerSet(self.bits & other.bits, self.universe)

    def __or__(self, other: "PlayerSet") -> "PlayerSet":
        self._same(other)
        return PlayerSet(self.bits | other.bits, self.universe)

    def __le__(self, other: "PlayerSet") -> bool:
        return self.issubset(other)

    def __len__(self) -> int:
        return popcount(self.bits)

    def __iter__(self):
        return iter(bits_of(self.bits))

    def __repr__(self) -> str:
        return f"PlayerSet({self.label})"


def tokenize(text: str, universe: Sequence[str]) -> list[str]:
    """Split a compact label such as ``"P1P4P5"`` into player names.

    Longest names are matched first so ``P12`` is not read as ``P1`` + ``2``.
    """
    names = sorted(universe, key=len, reverse=True)
    pattern = re.compile("|".join(re.escape(p) for p in names))
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = pattern.match(text, pos)
        if not m:
            raise StructureError(f"cannot parse {text!r} at position {pos}: unknown player")
        out.append(m.group(0))
        pos = m.end()
    return out


def default_players(n: int) -> tuple[str, ...]:
    return tuple(f"P{i}" for i in range(1, n + 1))


def minimize_masks(masks: Iterable[int]) -> tuple[int, ...]:
    """Inclusion-minimal members of a family of bitmasks, sorted by value."""
    uniq = sorted(set(masks), key=set_key)
    kept: list[int] = []
    for m in uniq:
        if not any(k & ~m == 0 for k in kept):
            kept.append(m)
    return tuple(sorted(kept))


@dataclass(frozen=True)
class AccessStructure:
    """Antichain of minimal authorized sets over an ordered player list."""

    players: tuple[str, ...]
    masks: tuple[int, ...]

    def __post_init__(self):
        n = len(self.players)
        limits.check("players", n)
        if len(set(self.players)) != n:
            raise StructureError("duplicate player names")
        if not self.masks:
            raise StructureError("no authorized sets")
        if list(self.masks) != sorted(set(self.masks)):
            raise StructureError("minimal sets must be deduplicated and sorted by bitmask")
        for m in self.masks:
            if m <= 0 or m >> n:
                raise StructureError(f"set {m:#x} is empty or outside the universe")
        for a, b in combinations(self.masks, 2):
            if a & ~b == 0 or b & ~a == 0:
                raise StructureError("minimal sets do not form an antichain")

    @classmethod
    def from_masks(cls, players: Sequence[str], masks: Iterable[int]) -> "AccessStructure":
        masks = list(masks)
        if not masks:
            raise StructureError("no authorized sets")
        return cls(tuple(players), minimize_masks(masks))

    @classmethod
    def parse(cls, sets: str | Iterable[str], players: Sequence[str] | int) -> "AccessStructure":
        """Build from compact labels, e.g. ``parse("P1P2 P1P4P5", 5)``."""
        if isinstance(players, int):
            players = default_players(players)
        if isinstance(sets, str):
            sets = sets.replace(",", " ").split()
        return minimize([PlayerSet.of(players, s) for s in sets])

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def r(self) -> int:
        return len(self.masks)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def support(self) -> int:
        """Bitmask of players that occur in some minimal set."""
        out = 0
        for m in self.masks:
            out |= m
        return out

    @property
    def minimal_sets(self) -> list[PlayerSet]:
        return [PlayerSet(m, self.players) for m in self.masks]

    def playerset(self, names: Iterable[str] | str) -> PlayerSet:
        return PlayerSet.of(self.players, names)

    def labels(self) -> list[str]:
        return [s.label for s in self.minimal_sets]

    def authorizes(self, mask: int) -> bool:
        return any(m & ~mask == 0 for m in self.masks)

    def __str__(self) -> str:
        return "{" + ", ".join(self.labels()) + "}"


def minimize(family: Sequence[PlayerSet]) -> AccessStructure:
    """Inclusion-minimal members of ``family`` as a canonical access structure."""
    if not family:
        raise StructureError("no authorized sets")
    universe = family[0].universe
    for s in family:
        if s.universe != universe:
            raise StructureError("player sets over different universes")
    return AccessStructure.from_masks(universe, (s.bits for s in family))


def is_authorized(gamma: AccessStructure, a: PlayerSet) -> bool:
    if a.universe != gamma.players:
        raise StructureError("player set over a different universe")
    return gamma.authorizes(a.bits)


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    witness: tuple[PlayerSet, PlayerSet] | None = None

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "witness": None if self.witness is None else [s.names for s in self.witness],
        }


def validate_quantum(gamma: AccessStructure) -> ValidityReport:
    """Every pair of authorized sets must overlap (no-cloning)."""
    for a, b in combinations(gamma.masks, 2):
        if a & b == 0:
            return ValidityReport(False, (PlayerSet(a, gamma.players), PlayerSet(b, gamma.players)))
    return ValidityReport(True)


def require_quantum(gamma: AccessStructure) -> None:
    report = validate_quantum(gamma)
    if not report.valid:
        a, b = report.witness
        raise StructureError(f"not a quantum access structure: {a.label} and {b.label} are disjoint")


def authorized_table(gamma: AccessStructure) -> np.ndarray:
    """Boolean array over all 2**n subsets: True where the subset is authorized."""
    n = gamma.n
    limits.check("enumeration", n)
    table = np.zeros(1 << n, dtype=bool)
    table[list(gamma.masks)] = True
    # upward closure, one coordinate at a time
    for i in range(n):
        view = table.reshape(-1, 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    return table


def meets_all_table(gamma: AccessStructure) -> np.ndarray:
    """Boolean array over subsets: True where the subset meets every minimal set."""
    limits.check("enumeration", gamma.n)
    subsets = np.arange(1 << gamma.n, dtype=np.int64)
    out = np.ones(1 << gamma.n, dtype=bool)
    for m in gamma.masks:
        out &= (subsets & m) != 0
    return out


@dataclass(frozen=True)
class UnauthorizedSplit:
    a1: tuple[PlayerSet, ...]
    a2: tuple[PlayerSet, ...]


def split_masks(gamma: AccessStructure) -> tuple[np.ndarray, np.ndarray]:
    auth = authorized_table(gamma)
    meets = meets_all_table(gamma)
    unauth = ~auth
    unauth[0] = False
    a1 = np.flatnonzero(unauth & ~meets)
    a2 = np.flatnonzero(unauth & meets)
    return a1, a2


def unauthorized_split(gamma: AccessStructure) -> UnauthorizedSplit:
    """Classify every non-empty unauthorized set by whether it misses some minimal set."""
    a1, a2 = split_masks(gamma)
    p = gamma.players
    return UnauthorizedSplit(
        tuple(PlayerSet(int(m), p) for m in a1),
        tuple(PlayerSet(int(m), p) for m in a2),
    )


def is_maximal(gamma: AccessStructure) -> bool:
    if not validate_quantum(gamma).valid:
        return False
    auth = authorized_table(gamma)
    unauth = ~auth
    unauth[0] = False
    return not bool(np.any(unauth & meets_all_table(gamma)))
