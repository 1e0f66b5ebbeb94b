"""Exhaustive enumeration of maximal (self-dual) structures on small universes.

Works on truth tables rather than antichains, so it is independent of the
closure/split machinery in :mod:`qaskit.core` and can serve as a cross-check
for it.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations

from . import limits
from .core import AccessStructure, default_players, minimize_masks


@lru_cache(maxsize=None)
def monotone_truth_tables(m: int) -> tuple[int, ...]:
    """All monotone Boolean functions on ``m`` variables as 2**m-bit truth tables.

    Bit ``x`` of a table is f(x). Built by the recursion f = (f0, f1) with
    f0 <= f1 pointwise.
    """
    if m == 0:
        return (0, 1)
    half = 1 << (m - 1)
    prev = monotone_truth_tables(m - 1)
    return tuple(f0 | (f1 << half) for f1 in prev for f0 in prev if f0 & ~f1 == 0)


def _is_monotone(table: int, n: int) -> bool:
    for i in range(n):
        bit = 1 << i
        for x in range(1 << n):
            if not x & bit and (table >> x) & 1 and not (table >> (x | bit)) & 1:
                return False
    return True


def self_dual_truth_tables(n: int) -> list[int]:
    """Truth tables of all non-constant monotone self-dual functions on n >= 1 variables.

    The values on sets containing player 0 are a monotone function on the
    other n-1 variables; self-duality fixes the rest, f(S) = not f(~S).
    """
    limits.check("extensions", n, bound=7)
    full = (1 << n) - 1
    out = []
    for g in monotone_truth_tables(n - 1):
        table = 0
        for y in range(1 << (n - 1)):
            x = (y << 1) | 1
            if (g >> y) & 1:
                table |= 1 << x
            else:
                table |= 1 << (full ^ x)
        if _is_monotone(table, n):
            out.append(table)
    return out


def table_to_structure(table: int, n: int, players=None) -> AccessStructure:
    true_points = [x for x in range(1 << n) if (table >> x) & 1]
    return AccessStructure(tuple(players or default_players(n)), minimize_masks(true_points))


def all_maximal_structures(n: int, players=None) -> list[AccessStructure]:
    """Every maximal quantum access structure on n players, canonically ordered."""
    found = [table_to_structure(t, n, players) for t in self_dual_truth_tables(n)]
    return sorted(found, key=lambda g: (g.r, g.masks))


def permute_mask(mask: int, perm: tuple[int, ...]) -> int:
    out = 0
    for i, j in enumerate(perm):
        if mask >> i & 1:
            out |= 1 << j
    return out


def canonical_form(gamma: AccessStructure) -> tuple[int, ...]:
    """Lexicographically least sorted mask tuple over all player relabelings."""
    limits.check("extensions", gamma.n, bound=9)
    best = None
    for perm in permutations(range(gamma.n)):
        image = tuple(sorted(permute_mask(m, perm) for m in gamma.masks))
        if best is None or image < best:
            best = image
    return best


def isomorphism_classes(structures) -> dict[tuple[int, ...], list[AccessStructure]]:
    classes: dict[tuple[int, ...], list[AccessStructure]] = {}
    for g in structures:
        classes.setdefault(canonical_form(g), []).append(g)
    return classes
