"""Probability measures on the binary tree, stored as conditional up-probabilities.

A measure assigns to every node at level n-1 the conditional probability of
the up move at step n.  The layout mirrors the tree: level n holds 2**(n-1)
entries, indexed root-first so that the children of node i sit at 2i (down)
and 2i+1 (up) one level deeper.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import GridCapError, ShapeError

Levels = tuple[tuple, ...]

DEFAULT_GRID_CAP = 10_000_000


def flat_dim(n_steps: int) -> int:
    """Number of free coordinates of a measure on an n_steps tree."""
    return 2**n_steps - 1


def level_slices(n_steps: int) -> list[slice]:
    """Slices of the flattened coordinate vector, one per level 1..n_steps."""
    slices = []
    start = 0
    for n in range(1, n_steps + 1):
        size = 2 ** (n - 1)
        slices.append(slice(start, start + size))
        start += size
    return slices


def check_levels(levels: Sequence[Sequence], n_steps: int, name: str) -> Levels:
    """Normalize per-level arrays to nested tuples, enforcing the 2**(n-1) shape."""
    try:
        normalized = tuple(tuple(level) for level in levels)
    except TypeError as exc:
        raise ShapeError(f"{name}: expected a sequence of per-level arrays") from exc
    if len(normalized) != n_steps:
        raise ShapeError(f"{name}: expected {n_steps} levels, got {len(normalized)}")
    for n, level in enumerate(normalized, start=1):
        expected = 2 ** (n - 1)
        if len(level) != expected:
            raise ShapeError(
                f"{name} level {n}: expected {expected} entries, got {len(level)}"
            )
    return normalized


@dataclass(frozen=True)
class Measure:
    """Conditional up-probabilities q[n-1][i] for step n from node i at level n-1.

    Entries are kept as given (floats, ints or Fractions), so exact-arithmetic
    callers can pass rationals through untouched.  Boundary values 0 and 1 are
    legal coordinates; equivalence to the reference measure is a separate flag.
    """

    n_steps: int
    q: Levels

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", check_levels(self.q, self.n_steps, "q"))

    @classmethod
    def constant(cls, n_steps: int, value) -> "Measure":
        return cls(n_steps, tuple(tuple([value] * 2 ** (n - 1)) for n in range(1, n_steps + 1)))

    @classmethod
    def from_step_values(cls, values: Sequence) -> "Measure":
        """Space-constant measure from one value per step."""
        n_steps = len(values)
        return cls(n_steps, tuple(tuple([v] * 2 ** (n - 1)) for n, v in enumerate(values, 1)))

    @classmethod
    def from_flat(cls, n_steps: int, flat: Sequence) -> "Measure":
        if len(flat) != flat_dim(n_steps):
            raise ShapeError(
                f"flat measure: expected {flat_dim(n_steps)} coordinates, got {len(flat)}"
            )
        levels = []
        pos = 0
        for n in range(1, n_steps + 1):
            size = 2 ** (n - 1)
            levels.append(tuple(flat[pos : pos + size]))
            pos += size
        return cls(n_steps, tuple(levels))

    def flat(self) -> np.ndarray:
        return np.array([v for level in self.q for v in level], dtype=float)

    def entries(self) -> Iterator[tuple[int, int, object]]:
        """Yield (level, node_index, value) in level-major order."""
        for n, level in enumerate(self.q, start=1):
            for i, v in enumerate(level):
                yield n, i, v

    def clamped(self, eps: float) -> "Measure":
        """Push boundary coordinates into the open interval by eps."""
        return Measure(
            self.n_steps,
            tuple(tuple(min(1.0 - eps, max(eps, float(v))) for v in level) for level in self.q),
        )


def d_infinity(q1: Measure, q2: Measure, /):
    """Largest coordinate-wise difference between two measures of equal shape."""
    if q1.n_steps != q2.n_steps:
        raise ShapeError(f"measure shapes differ: {q1.n_steps} vs {q2.n_steps} steps")
    return max(
        abs(a - b) for la, lb in zip(q1.q, q2.q) for a, b in zip(la, lb)
    )


def equivalent_to_P(q: Measure) -> bool:
    """True iff every coordinate lies strictly inside (0, 1)."""
    return all(0 < v < 1 for level in q.q for v in level)


def grid_count(n_steps: int, m: int) -> int:
    return (m + 1) ** flat_dim(n_steps)


def grid_measures(n_steps: int, m: int, cap: int = DEFAULT_GRID_CAP) -> Iterator[Measure]:
    """Enumerate all measures with coordinates on {0, 1/m, ..., 1}.

    Enumeration is lexicographic in the flattened coordinate vector with the
    first coordinate varying slowest, which fixes the tie-break order used by
    exhaustive searches.  Refuses to start when the total count exceeds cap.
    """
    if m < 1:
        raise ValueError("grid subdivisions m must be >= 1")
    count = grid_count(n_steps, m)
    if count > cap:
        raise GridCapError(
            f"grid of {count} measures exceeds the cap of {cap}; "
            f"reduce m or the horizon"
        )
    values = [k / m for k in range(m + 1)]
    for combo in itertools.product(values, repeat=flat_dim(n_steps)):
        yield Measure.from_flat(n_steps, combo)
