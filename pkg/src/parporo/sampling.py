"""Seeded, rational root sampling shared by the scan operations.

Roots are drawn with exact rational centers, sides, and truncation
parameters so downstream lattice arithmetic stays exact; a fixed seed
makes every scan reproducible regardless of worker count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import Geometry, Root

DEFAULT_GAMMA0 = (Fraction(0), Fraction(1, 4), Fraction(1, 2))


@dataclass(frozen=True)
class SamplerConfig:
    """Ranges for randomized root rectangles."""

    seed: int = 0
    samples: int = 20
    center_low: Fraction = Fraction(-2)
    center_high: Fraction = Fraction(2)
    side_choices: tuple[Fraction, ...] = (
        Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))
    gamma0_choices: tuple[Fraction, ...] = DEFAULT_GAMMA0
    center_grid: int = 16  # centers are drawn on the grid Z / center_grid

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.center_low >= self.center_high:
            raise ValueError("empty center range")


def draw_roots(geom: Geometry, config: SamplerConfig) -> list[Root]:
    rng = random.Random(config.seed)
    q = config.center_grid
    lo = int(config.center_low * q)
    hi = int(config.center_high * q)
    roots = []
    for _ in range(config.samples):
        center = tuple(Fraction(rng.randint(lo, hi), q) for _ in range(geom.n))
        top = Fraction(rng.randint(lo, hi), q)
        side = rng.choice(config.side_choices)
        gamma0 = rng.choice(config.gamma0_choices)
        roots.append(Root(geom, center, top, side, gamma0))
    return roots


def run_indexed(tasks: Sequence, worker, threads: int = 1) -> list:
    """Map ``worker`` over ``tasks`` preserving order; result is
    independent of the worker count."""
    threads = max(1, int(threads))
    if threads == 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))
