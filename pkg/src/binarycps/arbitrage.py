"""Independent arbitrage oracle via linear feasibility.

A self-financing strategy buys at the ask S and sells at the bid (1-lam)S at
every non-terminal node, starting from zero cash and zero shares; terminal
positions are liquidated at the same bid/ask.  Arbitrage exists iff some such
strategy ends with nonnegative value on every path and positive value
somewhere, which (by scale invariance) is the feasibility of a small LP with
the values summing to one.  This route never touches the score machinery, so
it cross-checks the critical-cost solver through the no-arbitrage theorem.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, LpSizeError
from .measures import Levels
from .simplex import solve_feasibility
from .solver import LambdaCReport
from .tree import MarketTree, frictionless_no_arbitrage

DEFAULT_LP_MAX_STEPS = 5
_EXACT_LAMBDA_TOL = 1e-12


@dataclass(frozen=True)
class Strategy:
    """Nonnegative share purchases and sales per node, levels 0..n_steps-1.

    Terminal liquidation is implicit: longs are sold at the bid, shorts are
    covered at the ask.
    """

    n_steps: int
    buy: Levels
    sell: Levels

    def scaled(self, factor: float) -> "Strategy":
        return Strategy(
            self.n_steps,
            tuple(tuple(v * factor for v in level) for level in self.buy),
            tuple(tuple(v * factor for v in level) for level in self.sell),
        )


@dataclass(frozen=True)
class CrossCheck:
    status: str  # "CONSISTENT" | "INCONSISTENT" | "INCONCLUSIVE"
    arbitrage_found: Optional[bool]
    expected_arbitrage: Optional[bool]
    reason: str


def replay_strategy(
    tree: MarketTree, strategy: Strategy, lam: float
) -> tuple[tuple[float, ...], Levels, Levels]:
    """Simulate the strategy: terminal values plus holdings/cash after each node."""
    spots = tree.node_prices()
    holdings: list[tuple[float, ...]] = []
    cash: list[tuple[float, ...]] = []
    for level in range(tree.n_steps):
        h_row, c_row = [], []
        for i in range(2**level):
            h_prev = holdings[level - 1][i >> 1] if level > 0 else 0.0
            c_prev = cash[level - 1][i >> 1] if level > 0 else 0.0
            bought = strategy.buy[level][i]
            sold = strategy.sell[level][i]
            h_row.append(h_prev + bought - sold)
            c_row.append(c_prev - spots[level][i] * bought + (1 - lam) * spots[level][i] * sold)
        holdings.append(tuple(h_row))
        cash.append(tuple(c_row))
    values = []
    for i in range(2**tree.n_steps):
        h = holdings[-1][i >> 1] if tree.n_steps > 0 else 0.0
        c = cash[-1][i >> 1] if tree.n_steps > 0 else 0.0
        spot = spots[tree.n_steps][i]
        values.append(c + (1 - lam) * spot * max(h, 0.0) + spot * min(h, 0.0))
    return tuple(values), tuple(holdings), tuple(cash)


def find_arbitrage(
    tree: MarketTree,
    lam: float,
    max_steps: int = DEFAULT_LP_MAX_STEPS,
    tol: float = 1e-9,
) -> Optional[Strategy]:
    """Arbitrage strategy at cost lam, or None when the market admits none.

    LP variables: buy/sell per non-terminal node plus a long/short split of
    each terminal holding; constraints pin the split, force every terminal
    value through a nonnegative slack, and normalize the total value to one.
    The returned witness is rescaled so its replayed values sum to one.
    """
    if not 0 <= lam < 1:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    n = tree.n_steps
    if n > max_steps:
        raise LpSizeError(f"horizon {n} exceeds the LP cap of {max_steps}")
    spots = tree.node_prices()
    n_nodes = 2**n - 1  # non-terminal
    n_term = 2**n

    def node_id(level: int, i: int) -> int:
        return 2**level - 1 + i

    n_trade = 2 * n_nodes  # buy, sell interleaved per node
    split_off = n_trade  # hp, hm interleaved per terminal
    slack_off = split_off + 2 * n_term
    n_vars = slack_off + n_term

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    value_rows = np.zeros((n_term, n_vars))
    for w in range(n_term):
        h_row = np.zeros(n_vars)
        for level in range(n):
            anc = w >> (n - level)
            nid = node_id(level, anc)
            h_row[2 * nid] += 1.0  # buy
            h_row[2 * nid + 1] -= 1.0  # sell
            value_rows[w, 2 * nid] -= spots[level][anc]
            value_rows[w, 2 * nid + 1] += (1 - lam) * spots[level][anc]
        h_row[split_off + 2 * w] -= 1.0
        h_row[split_off + 2 * w + 1] += 1.0
        rows.append(h_row)
        rhs.append(0.0)
        value_rows[w, split_off + 2 * w] = (1 - lam) * spots[n][w]
        value_rows[w, split_off + 2 * w + 1] = -spots[n][w]
    for w in range(n_term):
        vrow = value_rows[w].copy()
        vrow[slack_off + w] = -1.0
        rows.append(vrow)
        rhs.append(0.0)
    rows.append(value_rows.sum(axis=0))
    rhs.append(1.0)

    x = solve_feasibility(np.array(rows), np.array(rhs), tol=tol)
    if x is None:
        return None
    buy, sell = [], []
    for level in range(n):
        buy.append(tuple(float(x[2 * node_id(level, i)]) for i in range(2**level)))
        sell.append(tuple(float(x[2 * node_id(level, i) + 1]) for i in range(2**level)))
    strategy = Strategy(n, tuple(buy), tuple(sell))
    values, _, _ = replay_strategy(tree, strategy, lam)
    total = sum(values)
    if total <= tol:
        # the split variables absorbed all the value; no genuine witness
        return None
    return strategy.scaled(1.0 / total)


def ftap_cross_check(
    tree: MarketTree,
    lam: float,
    report: LambdaCReport,
    max_steps: int = DEFAULT_LP_MAX_STEPS,
) -> CrossCheck:
    """Compare the LP's arbitrage verdict against the critical-cost estimate.

    Below the critical cost arbitrage must exist, above it must not.  At the
    critical cost itself (certified estimates only) arbitrage exists exactly
    when the frictionless market admits it.  Inside the numeric margin of an
    uncertified estimate no side is trusted and the check is INCONCLUSIVE.
    """
    at_critical = abs(lam - report.lambda_c) <= _EXACT_LAMBDA_TOL
    if report.certified and at_critical:
        expected = not frictionless_no_arbitrage(tree)
        reason = "at certified critical cost: arbitrage iff frictionless arbitrage"
    elif lam < report.lambda_c - report.numeric_margin:
        expected = True
        reason = "below critical cost: arbitrage must exist"
    elif lam > report.lambda_c + report.numeric_margin:
        expected = False
        reason = "above critical cost: arbitrage must not exist"
    else:
        return CrossCheck(
            "INCONCLUSIVE",
            None,
            None,
            f"lambda {lam} within numeric margin {report.numeric_margin} of "
            f"uncertified estimate {report.lambda_c}",
        )
    found = find_arbitrage(tree, lam, max_steps=max_steps) is not None
    status = "CONSISTENT" if found == expected else "INCONSISTENT"
    return CrossCheck(status, found, expected, reason)


def strategy_to_csv_rows(tree: MarketTree, strategy: Strategy, lam: float) -> list[tuple]:
    """Rows (level, node_index, buy, sell, holding, cash) after trading each node."""
    _, holdings, cash = replay_strategy(tree, strategy, lam)
    rows = []
    for level in range(tree.n_steps):
        for i in range(2**level):
            rows.append(
                (
                    level,
                    i,
                    strategy.buy[level][i],
                    strategy.sell[level][i],
                    holdings[level][i],
                    cash[level][i],
                )
            )
    return rows
