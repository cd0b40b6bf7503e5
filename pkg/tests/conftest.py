"""Shared generators for random markets and measures."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from binarycps.measures import Measure, flat_dim
from binarycps.tree import MarketTree


def random_market(
    rng: np.random.Generator,
    n_steps: int,
    lo: float = 0.3,
    hi: float = 2.5,
    min_gap: float = 0.02,
    beta_floor: float = 0.05,
) -> MarketTree:
    """Node-heterogeneous market with alpha in (lo, hi) and beta_floor < beta < alpha."""
    alpha, beta = [], []
    for n in range(1, n_steps + 1):
        size = 2 ** (n - 1)
        a = rng.uniform(lo, hi, size)
        a = np.maximum(a, beta_floor + min_gap * 2)
        b = np.array([rng.uniform(beta_floor, av - min_gap) for av in a])
        alpha.append(tuple(float(v) for v in a))
        beta.append(tuple(float(v) for v in b))
    return MarketTree(n_steps, 1.0, tuple(alpha), tuple(beta))


def random_semi_market(
    rng: np.random.Generator, n_steps: int, lo: float = 0.3, hi: float = 2.5
) -> MarketTree:
    a = rng.uniform(lo, hi, n_steps)
    b = np.array([rng.uniform(0.05, av - 0.02) for av in a])
    return MarketTree.semi_homogeneous([float(v) for v in a], [float(v) for v in b], 1.0)


def random_measure(rng: np.random.Generator, n_steps: int, interior: bool = False) -> Measure:
    vec = rng.random(flat_dim(n_steps))
    if interior:
        vec = 0.02 + 0.96 * vec
    return Measure.from_flat(n_steps, [float(v) for v in vec])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


# hypothesis strategies


@st.composite
def market_trees(draw, max_steps: int = 4, lo: float = 0.2, hi: float = 3.0):
    n_steps = draw(st.integers(1, max_steps))
    alpha, beta = [], []
    for n in range(1, n_steps + 1):
        size = 2 ** (n - 1)
        a_row, b_row = [], []
        for _ in range(size):
            a = draw(st.floats(lo, hi))
            b = draw(st.floats(0.05, max(0.06, a * 0.9)))
            if b >= a:
                b = a * 0.9
            a_row.append(a)
            b_row.append(b)
        alpha.append(tuple(a_row))
        beta.append(tuple(b_row))
    return MarketTree(n_steps, 1.0, tuple(alpha), tuple(beta))


@st.composite
def markets_with_measures(draw, max_steps: int = 4, interior: bool = False):
    tree = draw(market_trees(max_steps=max_steps))
    low, high = (0.01, 0.99) if interior else (0.0, 1.0)
    flat = [
        draw(st.floats(low, high)) for _ in range(flat_dim(tree.n_steps))
    ]
    return tree, Measure.from_flat(tree.n_steps, flat)
