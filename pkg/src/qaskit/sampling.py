"""Seeded random quantum access structures for property campaigns."""

from __future__ import annotations

import numpy as np

from .core import AccessStructure, default_players, minimize_masks


def random_quantum_structure(
    rng: np.random.Generator, n: int, attempts: int = 16, density: float = 0.45
) -> AccessStructure:
    """Pairwise-intersecting antichain on ``n`` players built from random draws.

    Each draw is kept when it meets every set kept so far; the result is then
    minimized, which preserves pairwise intersection.
    """
    kept: list[int] = []
    weights = 1 << np.arange(n)
    for _ in range(attempts):
        m = int(weights[rng.random(n) < density].sum())
        if m and all(m & k for k in kept):
            kept.append(m)
    return AccessStructure(default_players(n), minimize_masks(kept))


def random_campaign(seed: int, count: int, max_players: int = 6, min_players: int = 2) -> list[AccessStructure]:
    rng = np.random.default_rng(seed)
    return [
        random_quantum_structure(rng, int(rng.integers(min_players, max_players + 1)))
        for _ in range(count)
    ]
