"""Moving between general, maximal and minimal maximal access structures.

Step logs: the procedures accept an optional ``steps`` list and append one
dict per applied change, so callers can replay or report the construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from . import limits
from .core import (
    AccessStructure,
    PlayerSet,
    is_maximal,
    popcount,
    require_quantum,
    set_key,
    split_masks,
)
from .errors import PivotError, SizeLimitError, StructureError

# A strategy receives candidate masks and the current structure and returns
# the mask to add (extension) or an ordering of pivots (reduction).
ExtendStrategy = Callable[[list[int], AccessStructure], int]
PivotPolicy = Callable[[list[int], AccessStructure], list[int]]


def _label(gamma: AccessStructure, mask: int) -> str:
    return PlayerSet(mask, gamma.players).label


def _masks_of(gamma: AccessStructure, sets) -> list[int]:
    out = []
    for s in sets:
        if isinstance(s, PlayerSet):
            out.append(s.bits)
        elif isinstance(s, int):
            out.append(s)
        else:
            out.append(gamma.playerset(s).bits)
    return out


def candidate_pairs(gamma: AccessStructure) -> list[tuple[PlayerSet, PlayerSet]]:
    """Unordered pairs {B, complement of B} with both sides unauthorized."""
    _, a2 = split_masks(gamma)
    full = gamma.full
    pairs = []
    for m in (int(x) for x in a2):
        c = full & ~m
        lo, hi = sorted((m, c), key=set_key)
        if lo == m:
            pairs.append((PlayerSet(lo, gamma.players), PlayerSet(hi, gamma.players)))
    pairs.sort(key=lambda p: set_key(p[0].bits))
    return pairs


def smallest_first(candidates: list[int], gamma: AccessStructure) -> int:
    return min(candidates, key=set_key)


def prefer(sets: Sequence, fallback: ExtendStrategy = smallest_first) -> ExtendStrategy:
    """Extension strategy that adds the listed sets first, in order, when admissible."""

    def strategy(candidates: list[int], gamma: AccessStructure) -> int:
        wanted = _masks_of(gamma, sets)
        for m in wanted:
            if m in candidates:
                return m
        return fallback(candidates, gamma)

    return strategy


def extend_to_maximal(
    gamma: AccessStructure,
    strategy: ExtendStrategy | None = None,
    steps: list | None = None,
) -> AccessStructure:
    """Grow ``gamma`` to a maximal structure by adding unauthorized, intersecting sets."""
    require_quantum(gamma)
    strategy = strategy or smallest_first
    current = gamma
    while True:
        _, a2 = split_masks(current)
        candidates = [int(m) for m in a2]
        if not candidates:
            return current
        pick = strategy(candidates, current)
        if pick not in candidates:
            raise StructureError(f"strategy chose {_label(current, pick)}, which is not an admissible candidate")
        # admissibility: not above any minimal set, meets every minimal set
        assert not current.authorizes(pick)
        assert all(pick & m for m in current.masks)
        current = AccessStructure.from_masks(current.players, current.masks + (pick,))
        if steps is not None:
            steps.append({"op": "add", "set": _label(current, pick), "r": current.r})


def all_maximal_extensions(gamma: AccessStructure) -> list[AccessStructure]:
    """Every maximal structure whose closure contains the closure of ``gamma``."""
    require_quantum(gamma)
    if gamma.n > limits.LIMITS.extensions:
        raise SizeLimitError(f"extensions limit exceeded: n={gamma.n} > {limits.LIMITS.extensions}")
    found: dict[tuple[int, ...], AccessStructure] = {}
    seen: set[tuple[int, ...]] = set()
    stack = [gamma]
    while stack:
        g = stack.pop()
        if g.masks in seen:
            continue
        seen.add(g.masks)
        pairs = candidate_pairs(g)
        if not pairs:
            found[g.masks] = g
            continue
        # every extension authorizes exactly one side of the first open pair
        b, bc = pairs[0]
        for side in (b, bc):
            stack.append(AccessStructure.from_masks(g.players, g.masks + (side.bits,)))
    return [found[k] for k in sorted(found, key=lambda m: (len(m), m))]


def is_minmax(gamma: AccessStructure) -> bool:
    return gamma.r == gamma.n and gamma.support == gamma.full and is_maximal(gamma)


def intersection_pivots(gamma: AccessStructure) -> list[int]:
    """Intersections of two or more minimal sets with at least two players."""
    masks = set(gamma.masks)
    found: set[int] = set()
    frontier = {a & b for a in masks for b in masks if a != b}
    while frontier:
        found |= frontier
        frontier = {f & m for f in frontier for m in masks if f & m not in found and f & m != f}
    return [b for b in found if popcount(b) >= 2 and b not in masks]


def larger_first(candidates: list[int], gamma: AccessStructure) -> list[int]:
    return sorted(candidates, key=lambda b: (-popcount(b), b))


def pivot_order(sets: Sequence, fallback: PivotPolicy = larger_first) -> PivotPolicy:
    """Reduction policy that tries the listed intersections first, in order."""

    def policy(candidates: list[int], gamma: AccessStructure) -> list[int]:
        wanted = [m for m in _masks_of(gamma, sets) if m in candidates]
        rest = [m for m in fallback(candidates, gamma) if m not in wanted]
        return wanted + rest

    return policy


def replace_step(gamma: AccessStructure, pivot: int) -> tuple[AccessStructure, list[int], int | None]:
    """Replace every minimal set containing ``pivot`` by it and delete its complement."""
    comp = gamma.full & ~pivot
    replaced = [m for m in gamma.masks if m & pivot == pivot]
    deleted = comp if comp in gamma.masks else None
    kept = [m for m in gamma.masks if m & pivot != pivot and m != comp]
    return AccessStructure.from_masks(gamma.players, kept + [pivot]), replaced, deleted


def switch(gamma: AccessStructure, minimal: int) -> AccessStructure:
    """Swap a minimal set for its complement, keeping every other subset's status.

    For a maximal structure this yields another maximal structure: the
    removed set's one-player extensions stay authorized.
    """
    extra = [minimal | (1 << p) for p in range(gamma.n) if not minimal >> p & 1]
    comp = gamma.full & ~minimal
    rest = [m for m in gamma.masks if m != minimal]
    return AccessStructure.from_masks(gamma.players, rest + extra + [comp])


def _contains(big: AccessStructure, small: AccessStructure | None) -> bool:
    return small is None or all(big.authorizes(m) for m in small.masks)


def _switch_search(
    gamma: AccessStructure, protect: AccessStructure | None, budget: int
) -> list[tuple[int, AccessStructure]] | None:
    """Shortest switch sequence to a maximal structure with fewer minimal sets.

    The target keeps every player of ``gamma`` in use and contains ``protect``.
    Intermediate structures must contain ``protect`` too.
    """
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], int, AccessStructure] | None] = {gamma.masks: None}
    queue = deque([gamma])
    while queue:
        g = queue.popleft()
        if g.r < gamma.r and g.support == gamma.support:
            path = []
            key = g.masks
            while parent[key] is not None:
                prev, m, h = parent[key]
                path.append((m, h))
                key = prev
            return path[::-1]
        for m in g.masks:
            h = switch(g, m)
            if h.masks in parent or not _contains(h, protect):
                continue
            parent[h.masks] = (g.masks, m, h)
            if len(parent) > budget:
                return None
            queue.append(h)
    return None


def reduce_to_minmax(
    gamma_m: AccessStructure,
    policy: PivotPolicy | None = None,
    steps: list | None = None,
    protect: AccessStructure | None = None,
    search_budget: int = 200_000,
) -> AccessStructure:
    """Reduce a maximal structure until r equals the number of players in use.

    Each round tries intersection pivots in ``policy`` order; a pivot step is
    kept only if the result is maximal, uses the same players, has fewer
    minimal sets and still contains ``protect``. When no pivot step applies but
    r is above the player count, a breadth-first search over switches finds a
    shorter route. Raises if the search fails, unless ``protect`` is given, in
    which case the smallest structure reached is returned.
    """
    if not is_maximal(gamma_m):
        raise StructureError("input is not a maximal quantum access structure")
    if protect is not None and not _contains(gamma_m, protect):
        raise StructureError("input does not contain the protected structure")
    policy = policy or larger_first
    current = gamma_m
    target = popcount(current.support)
    while current.r > target:
        for pivot in policy(intersection_pivots(current), current):
            nxt, replaced, deleted = replace_step(current, pivot)
            if (
                nxt.r < current.r
                and nxt.support == current.support
                and is_maximal(nxt)
                and _contains(nxt, protect)
            ):
                if steps is not None:
                    steps.append({
                        "op": "replace",
                        "pivot": _label(current, pivot),
                        "replaced": [_label(current, m) for m in replaced],
                        "deleted": None if deleted is None else _label(current, deleted),
                        "r": nxt.r,
                    })
                current = nxt
                break
        else:
            path = _switch_search(current, protect, search_budget)
            if path is None:
                if protect is not None:
                    return current
                raise PivotError(f"no reduction found from r={current.r} (players in use: {target})")
            for m, h in path:
                if steps is not None:
                    steps.append({
                        "op": "switch",
                        "removed": _label(current, m),
                        "added": _label(current, current.full & ~m),
                        "r": h.r,
                    })
            current = path[-1][1]
    return current


def pivot_condition(gamma: AccessStructure, pivot: int) -> bool:
    """Every proper subset of the pivot's complement misses some other minimal set."""
    comp = gamma.full & ~pivot
    others = [m for m in gamma.masks if m != pivot]
    sub = comp
    # walk proper subsets of comp
    while True:
        sub = (sub - 1) & comp
        if not any(sub & m == 0 for m in others):
            return False
        if sub == 0:
            return True


def grow_minmax(
    gamma: AccessStructure,
    new_player: str,
    pivot=None,
    steps: list | None = None,
) -> AccessStructure:
    """Add one player to a minimal maximal structure, keeping r equal to n.

    ``pivot`` names the minimal set that absorbs the new player; when omitted,
    minimal sets are tried in canonical order.
    """
    if not is_minmax(gamma):
        raise StructureError("input is not a minimal maximal quantum access structure")
    if new_player in gamma.players:
        raise StructureError(f"player {new_player!r} already present")
    if pivot is None:
        order = list(gamma.masks)
    else:
        order = _masks_of(gamma, [pivot])
    players = gamma.players + (new_player,)
    bit = 1 << gamma.n
    tried = []
    for a in order:
        tried.append(_label(gamma, a))
        if a not in gamma.masks or not pivot_condition(gamma, a):
            continue
        comp = gamma.full & ~a
        masks = [m for m in gamma.masks if m != a] + [a | bit, comp | bit]
        out = AccessStructure.from_masks(players, masks)
        if out.r == gamma.r + 1 and is_minmax(out):
            if steps is not None:
                steps.append({"op": "grow", "player": new_player, "pivot": tried[-1], "r": out.r})
            return out
    raise PivotError(f"no valid pivot for adding {new_player}; tried {tried}", tried)


@dataclass(frozen=True)
class CorollaryReport:
    r: int
    n: int
    r_at_least_n: bool
    r_greater_than_n: bool
    minimal_maximal: bool

    @property
    def note(self) -> str:
        if self.minimal_maximal:
            return "r = n: minimal maximal structure, so the strict bound r > n does not hold here"
        if self.r_greater_than_n:
            return "r > n"
        return "r < n: only possible when some players never occur in a minimal set"

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "n": self.n,
            "r_at_least_n": self.r_at_least_n,
            "r_greater_than_n": self.r_greater_than_n,
            "minimal_maximal": self.minimal_maximal,
            "note": self.note,
        }


def check_corollary(gamma: AccessStructure) -> CorollaryReport:
    if not is_maximal(gamma):
        raise StructureError("input is not a maximal quantum access structure")
    return CorollaryReport(gamma.r, gamma.n, gamma.r >= gamma.n, gamma.r > gamma.n, is_minmax(gamma))


def min_r_by_support(structures: Sequence[AccessStructure]) -> dict[int, int]:
    """Smallest number of minimal sets among maximal structures with each player support."""
    best: dict[int, int] = {}
    for g in structures:
        s = g.support
        best[s] = min(best.get(s, g.r), g.r)
    return best


def closure_contains(big: AccessStructure, small: AccessStructure) -> bool:
    """True when every set authorized by ``small`` is authorized by ``big``."""
    if big.players != small.players:
        raise StructureError("structures over different universes")
    return _contains(big, small)


def closure_equal(a: AccessStructure, b: AccessStructure) -> bool:
    if a.players != b.players:
        raise StructureError("structures over different universes")
    return a.masks == b.masks
