"""Backward tightening factors that bound any consistent shadow price.

For a measure Q the martingale property squeezes the admissible ratio of a
shadow price to the spot into per-node intervals.  Walking backward from the
horizon with

    r_plus  = q * alpha * rho_plus(up child)  + (1-q) * beta * rho_plus(down child)
    r_minus = q * alpha * rho_minus(up child) + (1-q) * beta * rho_minus(down child)
    rho_plus = min(1, r_plus),   rho_minus = max(1, r_minus)

gives the effective interval [(1-lam) * rho_minus * S, rho_plus * S].  The
score min rho_plus/rho_minus over all nodes decides whether Q supports a
consistent price system at cost lam: it does iff the score is >= 1 - lam.

The scalar path below works on plain Python numbers so exact rationals flow
through unchanged; the batch path vectorizes the same recursion over many
measures at once for searches.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ShapeError
from .measures import Levels, Measure, check_levels, flat_dim, level_slices
from .tree import MarketTree


@dataclass(frozen=True)
class RhoTables:
    """Per-node tightening factors.

    rho_plus / rho_minus carry rows for levels 1..n_steps+1 (the last row is
    identically 1 on the terminal nodes); r_plus / r_minus carry the raw
    averages for levels 1..n_steps.  Row n has 2**(n-1) entries and describes
    nodes at level n-1.
    """

    n_steps: int
    rho_plus: Levels
    rho_minus: Levels
    r_plus: Levels
    r_minus: Levels


@dataclass(frozen=True)
class Diagnostics:
    """Structure of the nodes attaining the critical ratio.

    attained[n-1] lists the node indices at level n-1 whose ratio equals the
    critical value 1 - lambda_c (within tolerance); attained_count is the
    total, deepest_attained_level the largest level with a hit (None when
    there is none).  runner_up_ratio is the smallest ratio off the attained
    set (the global minimum when every node is attained) and ratio_gap its
    distance to the global minimum.
    """

    attained: tuple[tuple[int, ...], ...]
    attained_count: int
    deepest_attained_level: Optional[int]
    runner_up_ratio: float
    ratio_gap: float


def _check_pair(tree: MarketTree, q: Measure) -> None:
    if tree.n_steps != q.n_steps:
        raise ShapeError(f"tree has {tree.n_steps} steps but measure has {q.n_steps}")
    check_levels(tree.alpha, tree.n_steps, "alpha")
    check_levels(tree.beta, tree.n_steps, "beta")


def compute_rho(tree: MarketTree, q: Measure) -> RhoTables:
    """Evaluate the backward recursion for one measure.

    The arithmetic order is fixed: (q*alpha*child_up) + ((1-q)*beta*child_down),
    so identical inputs give bit-identical tables.
    """
    _check_pair(tree, q)
    n_steps = tree.n_steps
    rho_plus: list[tuple] = [()] * (n_steps + 1)
    rho_minus: list[tuple] = [()] * (n_steps + 1)
    r_plus: list[tuple] = [()] * n_steps
    r_minus: list[tuple] = [()] * n_steps
    ones = tuple([1] * 2**n_steps)
    rho_plus[n_steps] = ones
    rho_minus[n_steps] = ones
    for n in range(n_steps, 0, -1):
        qs = q.q[n - 1]
        alphas = tree.alpha[n - 1]
        betas = tree.beta[n - 1]
        child_p = rho_plus[n]
        child_m = rho_minus[n]
        row_rp = tuple(
            qs[i] * alphas[i] * child_p[2 * i + 1] + (1 - qs[i]) * betas[i] * child_p[2 * i]
            for i in range(len(alphas))
        )
        row_rm = tuple(
            qs[i] * alphas[i] * child_m[2 * i + 1] + (1 - qs[i]) * betas[i] * child_m[2 * i]
            for i in range(len(alphas))
        )
        r_plus[n - 1] = row_rp
        r_minus[n - 1] = row_rm
        rho_plus[n - 1] = tuple(min(1, v) for v in row_rp)
        rho_minus[n - 1] = tuple(max(1, v) for v in row_rm)
    return RhoTables(n_steps, tuple(rho_plus), tuple(rho_minus), tuple(r_plus), tuple(r_minus))


def rho_score(tables: RhoTables):
    """Smallest ratio rho_plus/rho_minus over levels 1..n_steps; lies in (0, 1]."""
    return min(
        p / m
        for n in range(tables.n_steps)
        for p, m in zip(tables.rho_plus[n], tables.rho_minus[n])
    )


def min_ratio_node(tables: RhoTables) -> tuple[int, int]:
    """(level, node_index) of the node attaining the score, first in order."""
    best = None
    where = (1, 0)
    for n in range(tables.n_steps):
        for i, (p, m) in enumerate(zip(tables.rho_plus[n], tables.rho_minus[n])):
            ratio = p / m
            if best is None or ratio < best:
                best = ratio
                where = (n + 1, i)
    return where


def delta(tables: RhoTables, lam: float, level: int, node_index: int):
    """Effective spread gap rho_plus - (1-lam) * rho_minus at one node."""
    return tables.rho_plus[level - 1][node_index] - (1 - lam) * tables.rho_minus[level - 1][node_index]


def delta_rows(tables: RhoTables, lam: float) -> Levels:
    """All gaps for levels 1..n_steps+1 (the last row is constantly lam)."""
    rows = [
        tuple(p - (1 - lam) * m for p, m in zip(tables.rho_plus[n], tables.rho_minus[n]))
        for n in range(tables.n_steps)
    ]
    rows.append(tuple([lam] * 2**tables.n_steps))
    return tuple(rows)


def diagnostics(tables: RhoTables, lambda_c: float, tol: float = 1e-9) -> Diagnostics:
    """Locate the nodes whose ratio attains 1 - lambda_c within relative tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    target = 1 - lambda_c
    attained = []
    off_ratios = []
    all_ratios = []
    for n in range(tables.n_steps):
        hits = []
        for i, (p, m) in enumerate(zip(tables.rho_plus[n], tables.rho_minus[n])):
            ratio = p / m
            all_ratios.append(ratio)
            if abs(p - target * m) <= tol * m:
                hits.append(i)
            else:
                off_ratios.append(ratio)
        attained.append(tuple(hits))
    count = sum(len(hits) for hits in attained)
    deepest = max((n + 1 for n, hits in enumerate(attained) if hits), default=None)
    score = min(all_ratios)
    runner_up = min(off_ratios) if off_ratios else score
    return Diagnostics(tuple(attained), count, deepest, runner_up, runner_up - score)


def score_one(tree: MarketTree, flat_q: np.ndarray) -> float:
    """rho score of one flattened measure vector (float fast path)."""
    n_steps = tree.n_steps
    slices = level_slices(n_steps)
    rp = np.ones(2**n_steps)
    rm = np.ones(2**n_steps)
    best = 1.0
    for n in range(n_steps, 0, -1):
        qs = flat_q[slices[n - 1]]
        alphas = np.asarray(tree.alpha[n - 1], dtype=float)
        betas = np.asarray(tree.beta[n - 1], dtype=float)
        up_p = qs * alphas * rp[1::2]
        down_p = (1 - qs) * betas * rp[0::2]
        up_m = qs * alphas * rm[1::2]
        down_m = (1 - qs) * betas * rm[0::2]
        rp = np.minimum(1.0, up_p + down_p)
        rm = np.maximum(1.0, up_m + down_m)
        best = min(best, float(np.min(rp / rm)))
    return best


def score_batch(tree: MarketTree, points: np.ndarray) -> np.ndarray:
    """rho scores for a (batch, flat_dim) array of measure vectors."""
    n_steps = tree.n_steps
    if points.ndim != 2 or points.shape[1] != flat_dim(n_steps):
        raise ShapeError(
            f"points must have shape (batch, {flat_dim(n_steps)}), got {points.shape}"
        )
    slices = level_slices(n_steps)
    batch = points.shape[0]
    rp = np.ones((batch, 2**n_steps))
    rm = np.ones((batch, 2**n_steps))
    best = np.ones(batch)
    for n in range(n_steps, 0, -1):
        qs = points[:, slices[n - 1]]
        alphas = np.asarray(tree.alpha[n - 1], dtype=float)
        betas = np.asarray(tree.beta[n - 1], dtype=float)
        rp = np.minimum(1.0, qs * alphas * rp[:, 1::2] + (1 - qs) * betas * rp[:, 0::2])
        rm = np.maximum(1.0, qs * alphas * rm[:, 1::2] + (1 - qs) * betas * rm[:, 0::2])
        np.minimum(best, np.min(rp / rm, axis=1), out=best)
    return best


def tables_to_csv_rows(tables: RhoTables) -> list[tuple]:
    """Rows (level, node_index, rho_plus, rho_minus, r_plus, r_minus).

    The terminal row n_steps+1 carries empty r fields since the raw averages
    stop at the horizon.
    """
    rows: list[tuple] = []
    for n in range(1, tables.n_steps + 2):
        for i in range(2 ** (n - 1)):
            if n <= tables.n_steps:
                rows.append(
                    (
                        n,
                        i,
                        tables.rho_plus[n - 1][i],
                        tables.rho_minus[n - 1][i],
                        tables.r_plus[n - 1][i],
                        tables.r_minus[n - 1][i],
                    )
                )
            else:
                rows.append((n, i, tables.rho_plus[n - 1][i], tables.rho_minus[n - 1][i], "", ""))
    return rows
