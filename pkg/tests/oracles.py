"""Brute-force reference implementations used only by the tests.

They deliberately avoid the library's bitmask tricks and numpy tables: sets
are frozensets of player indices and every question is answered by direct
enumeration.
"""

from __future__ import annotations

from itertools import combinations


def subsets(n: int):
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            yield frozenset(combo)


def as_sets(masks) -> list[frozenset]:
    return [frozenset(i for i in range(m.bit_length()) if m >> i & 1) for m in masks]


def authorized(minimal: list[frozenset], a: frozenset) -> bool:
    return any(m <= a for m in minimal)


def complement_exactly_one(masks, n: int) -> bool:
    """Maximality: for every non-empty proper A, exactly one of A and its complement is authorized."""
    minimal = as_sets(masks)
    everyone = frozenset(range(n))
    for a in subsets(n):
        if not a or a == everyone:
            continue
        if authorized(minimal, a) == authorized(minimal, everyone - a):
            return False
    return True


def monotone_tables(n: int) -> list[dict]:
    """All monotone Boolean functions on n variables as dicts frozenset -> bool (n <= 5)."""
    points = list(subsets(n))
    out = []

    def extend(i, table):
        if i == len(points):
            out.append(dict(table))
            return
        x = points[i]
        # points are ordered by size, so every proper subset is already decided
        forced = any(table[x - {j}] for j in x)
        for value in ((True,) if forced else (False, True)):
            table[x] = value
            extend(i + 1, table)
        del table[x]

    extend(0, {})
    return out


def self_dual_families(n: int) -> list[frozenset]:
    """Minimal-set families of all monotone self-dual functions on n variables."""
    everyone = frozenset(range(n))
    found = []
    for f in monotone_tables(n):
        if all(f[x] != f[everyone - x] for x in f):
            true_sets = [x for x, v in f.items() if v]
            minimal = frozenset(x for x in true_sets if not any(y < x for y in true_sets))
            found.append(minimal)
    return found


def to_mask(s) -> int:
    return sum(1 << i for i in s)


def set_partitions(r: int):
    """Set partitions of range(r) via restricted-growth strings."""

    def grow(prefix, top):
        if len(prefix) == r:
            blocks = [[] for _ in range(top + 1)]
            for i, b in enumerate(prefix):
                blocks[b].append(i)
            yield blocks
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))

    if r == 0:
        yield []
        return
    yield from grow([0], 0)


def min_partition_size(r: int, realizable) -> int:
    """Fewest blocks over all set partitions whose blocks are all realizable."""
    best = None
    for blocks in set_partitions(r):
        if all(realizable(frozenset(b)) for b in blocks):
            best = len(blocks) if best is None else min(best, len(blocks))
    return best


def weighted_induces(block_masks, n: int, weights: dict[int, int], k: int) -> bool:
    """Does {A : sum of weights >= k} have exactly the given minimal sets?"""
    players = sorted(weights)
    auth = [frozenset(c) for size in range(1, len(players) + 1)
            for c in combinations(players, size) if sum(weights[p] for p in c) >= k]
    minimal = {a for a in auth if not any(b < a for b in auth)}
    return minimal == set(as_sets(block_masks))
