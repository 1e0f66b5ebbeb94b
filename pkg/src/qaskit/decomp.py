"""Decompositions of an access structure into realizable blocks.

A block is realizable when an oracle can exhibit a scheme for it. The
default oracle looks for a bundled (weighted) threshold: player p holds
w_p shares of a ((k, 2k-1)) scheme, the unused shares are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Protocol

import numpy as np

from . import limits
from .core import AccessStructure, PlayerSet, bits_of, require_quantum
from .errors import SizeLimitError, StructureError


def smallest_prime_at_least(x: int) -> int:
    q = max(x, 2)
    while not _is_prime(q):
        q += 1
    return q


@dataclass(frozen=True)
class BundledThreshold:
    participants: PlayerSet
    weights: tuple[int, ...]  # aligned with participants, ascending player index
    threshold: int
    field_order: int

    @property
    def total_shares(self) -> int:
        return sum(self.weights)

    def weight_map(self) -> dict[str, int]:
        return dict(zip(self.participants.names, self.weights))

    def induced(self) -> AccessStructure:
        idx = list(self.participants)
        masks = []
        for local in range(1, 1 << len(idx)):
            if sum(w for j, w in enumerate(self.weights) if local >> j & 1) >= self.threshold:
                masks.append(sum(1 << idx[j] for j in range(len(idx)) if local >> j & 1))
        return AccessStructure.from_masks(self.participants.universe, masks)

    def validate(self, block: AccessStructure | None = None) -> None:
        k, m, q = self.threshold, self.total_shares, self.field_order
        if len(self.weights) != len(self.participants) or min(self.weights) < 1:
            raise StructureError("weights must be positive, one per participant")
        if m > 2 * k - 1:
            raise StructureError(f"m={m} exceeds 2k-1={2 * k - 1}")
        if q < 2 * k - 1 or not _is_prime(q):
            raise StructureError(f"field order {q} must be a prime >= {2 * k - 1}")
        if block is not None and self.induced().masks != block.masks:
            raise StructureError("witness does not induce the block")

    def to_dict(self) -> dict:
        return {
            "weights": self.weight_map(),
            "k": self.threshold,
            "m": self.total_shares,
            "q": self.field_order,
        }


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, int(q**0.5) + 1))


def unanimity_witness(block: AccessStructure) -> BundledThreshold | None:
    if block.r != 1:
        return None
    mask = block.masks[0]
    k = bin(mask).count("1")
    return BundledThreshold(PlayerSet(mask, block.players), (1,) * k, k, smallest_prime_at_least(2 * k - 1))


@lru_cache(maxsize=64)
def _weight_grid(p: int, max_weight: int) -> np.ndarray:
    grid = np.array(list(product(range(1, max_weight + 1), repeat=p)), dtype=np.int32)
    # canonical search order: fewest total shares, then lexicographic
    order = np.lexsort(grid.T[::-1].tolist() + [grid.sum(axis=1)])
    return grid[order]


def _local_masks(block: AccessStructure, idx: list[int]) -> list[int]:
    pos = {g: j for j, g in enumerate(idx)}
    return [sum(1 << pos[b] for b in bits_of(m)) for m in block.masks]


def _maximal_unauthorized(local_sets: list[int], p: int) -> list[int]:
    unauth = [s for s in range(1 << p) if not any(a & ~s == 0 for a in local_sets)]
    unauth_set = set(unauth)
    return [s for s in unauth if all((s | (1 << j)) not in unauth_set for j in range(p) if not s >> j & 1)]


def recognize_bundled_threshold(
    block: AccessStructure, max_weight: int = 5, max_threshold: int = 25
) -> BundledThreshold | None:
    """Find a bundled threshold inducing exactly ``block``, or None within the bounds.

    Among all witnesses the one with fewest total shares, then smallest
    threshold, then lexicographically smallest weights is returned.
    """
    require_quantum(block)
    if block.r == 1:
        return unanimity_witness(block)
    idx = bits_of(block.support)
    p = len(idx)
    if max_weight**p > 5_000_000:
        raise SizeLimitError(f"weight search too large: {max_weight}**{p}")
    local = _local_masks(block, idx)
    maxun = _maximal_unauthorized(local, p)
    grid = _weight_grid(p, max_weight)

    def sums(sets):
        cols = np.array([[s >> j & 1 for j in range(p)] for s in sets], dtype=np.int32)
        return grid @ cols.T

    min_auth = sums(local).min(axis=1)
    max_unauth = sums(maxun).max(axis=1) if maxun else np.zeros(len(grid), dtype=np.int32)
    m = grid.sum(axis=1)
    k_lo = np.maximum(max_unauth + 1, (m + 2) // 2)
    k_hi = np.minimum(min_auth, max_threshold)
    ok = np.flatnonzero(k_lo <= k_hi)
    if ok.size == 0:
        return None
    # grid is sorted by m; within equal m pick smallest threshold
    first_m = m[ok[0]]
    same = ok[m[ok] == first_m]
    best = same[np.argmin(k_lo[same])]
    k = int(k_lo[best])
    witness = BundledThreshold(
        PlayerSet(block.support, block.players),
        tuple(int(w) for w in grid[best]),
        k,
        smallest_prime_at_least(2 * k - 1),
    )
    witness.validate(block)
    return witness


class Oracle(Protocol):
    def __call__(self, block: AccessStructure) -> BundledThreshold | None: ...

    def config(self) -> dict: ...


@dataclass(frozen=True)
class BundledOracle:
    max_weight: int = 5
    max_threshold: int = 25
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, block: AccessStructure) -> BundledThreshold | None:
        key = (block.players, block.masks)
        if key not in self._cache:
            self._cache[key] = recognize_bundled_threshold(block, self.max_weight, self.max_threshold)
        return self._cache[key]

    def config(self) -> dict:
        return {"oracle": "bundled", "max_weight": self.max_weight, "max_threshold": self.max_threshold}


@dataclass(frozen=True)
class UnanimityOracle:
    """Only single minimal sets are realizable, which forces the trivial decomposition."""

    def __call__(self, block: AccessStructure) -> BundledThreshold | None:
        return unanimity_witness(block)

    def config(self) -> dict:
        return {"oracle": "unanimity"}


DEFAULT_ORACLE = BundledOracle()


def make_oracle(name: str = "bundled", max_weight: int = 5, max_threshold: int = 25) -> Oracle:
    if name == "bundled":
        if (max_weight, max_threshold) == (5, 25):
            return DEFAULT_ORACLE
        return BundledOracle(max_weight, max_threshold)
    if name == "unanimity":
        return UnanimityOracle()
    raise StructureError(f"unknown oracle {name!r}")


def subfamily(gamma: AccessStructure, index_mask: int) -> AccessStructure:
    return AccessStructure(gamma.players, tuple(m for i, m in enumerate(gamma.masks) if index_mask >> i & 1))


def enumerate_realizable_subfamilies(
    gamma: AccessStructure, oracle: Oracle | None = None
) -> dict[int, BundledThreshold]:
    """Witness for every realizable non-empty subset of minimal-set indices.

    Keys are index bitmasks (bit i selects the i-th minimal set in canonical
    order); absent keys are not realizable.
    """
    oracle = oracle or DEFAULT_ORACLE
    limits.check("decomposition", gamma.r)
    out = {}
    for t in range(1, 1 << gamma.r):
        w = oracle(subfamily(gamma, t))
        if w is not None:
            out[t] = w
    return out


@dataclass(frozen=True)
class Decomposition:
    gamma: AccessStructure
    index_blocks: tuple[int, ...]  # index bitmasks, ordered by lowest index
    witnesses: tuple[BundledThreshold, ...]
    oracle_config: dict = field(default_factory=dict)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.index_blocks)

    @property
    def blocks(self) -> list[AccessStructure]:
        return [subfamily(self.gamma, t) for t in self.index_blocks]

    def validate(self) -> None:
        union = 0
        for t in self.index_blocks:
            if union & t:
                raise StructureError("decomposition blocks overlap")
            union |= t
        if union != (1 << self.gamma.r) - 1:
            raise StructureError("decomposition blocks do not cover the structure")
        for block, w in zip(self.blocks, self.witnesses):
            w.validate(block)

    def to_dict(self) -> dict:
        from .io import structure_to_dict

        return {
            "l": self.l,
            "r": self.gamma.r,
            "oracle": self.oracle_config,
            "blocks": [
                {"structure": structure_to_dict(b), "witness": w.to_dict()}
                for b, w in zip(self.blocks, self.witnesses)
            ],
        }


def _lowest(x: int) -> int:
    return (x & -x).bit_length() - 1


def optimal_decomposition(gamma: AccessStructure, oracle: Oracle | None = None) -> Decomposition:
    """Partition the minimal sets into the fewest oracle-realizable blocks.

    Exact DP over index subsets: the block holding the lowest remaining index
    is chosen among realizable subsets, the rest is solved recursively. Among
    partitions with the fewest blocks the one with the fewest total shares
    wins; remaining ties go to the lexicographically smallest list of block
    index bitmasks (blocks ordered by lowest index).
    """
    require_quantum(gamma)
    oracle = oracle or DEFAULT_ORACLE
    table = enumerate_realizable_subfamilies(gamma, oracle)
    r = gamma.r
    for i in range(r):
        if (1 << i) not in table:
            raise StructureError(f"oracle rejects the single minimal set {gamma.minimal_sets[i].label}")
    by_low: dict[int, list[int]] = {i: [] for i in range(r)}
    for t in sorted(table):
        by_low[_lowest(t)].append(t)

    memo: dict[int, tuple[int, int, tuple[int, ...]]] = {0: (0, 0, ())}

    def solve(mask: int) -> tuple[int, int, tuple[int, ...]]:
        if mask in memo:
            return memo[mask]
        best = None
        for t in by_low[_lowest(mask)]:
            if t & ~mask:
                continue
            count, shares, rest = solve(mask & ~t)
            cand = (count + 1, shares + table[t].total_shares, (t,) + rest)
            if best is None or cand < best:
                best = cand
        memo[mask] = best
        return best

    _, _, blocks = solve((1 << r) - 1)
    decomposition = Decomposition(gamma, blocks, tuple(table[t] for t in blocks), oracle.config())
    decomposition.validate()
    return decomposition


def trivial_decomposition(gamma: AccessStructure) -> Decomposition:
    blocks = tuple(1 << i for i in range(gamma.r))
    witnesses = tuple(unanimity_witness(subfamily(gamma, t)) for t in blocks)
    return Decomposition(gamma, blocks, witnesses, {"oracle": "unanimity"})


def block_index_masks(gamma: AccessStructure, blocks: list[AccessStructure]) -> tuple[int, ...]:
    """Index bitmasks for explicitly given blocks (each a subfamily of ``gamma``)."""
    pos = {m: i for i, m in enumerate(gamma.masks)}
    out = []
    for b in blocks:
        t = 0
        for m in b.masks:
            if m not in pos:
                raise StructureError(f"{PlayerSet(m, gamma.players).label} is not a minimal set of the structure")
            t |= 1 << pos[m]
        out.append(t)
    return tuple(sorted(out, key=_lowest))
