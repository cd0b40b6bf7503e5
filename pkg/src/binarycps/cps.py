"""Forward construction and verification of consistent price systems.

Given a measure whose spread gaps are nonnegative everywhere, a shadow price
is grown level by level: the root ratio is picked inside the effective
interval, then at each node the up-child slack is picked inside a feasible
interval derived from the tables and the down-child follows from the
martingale identity.  Nonnegative gaps guarantee the feasible interval is
never empty (up to rounding), so construction cannot fail once the
precondition holds.

Slack bookkeeping: slack[k][z] = rho_plus(level k+1, z) - s_tilde/spot, which
stays within [0, gap(level k+1, z)] exactly when the shadow price respects the
effective interval at that node.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import CpsConstructionError, ShapeError
from .measures import Levels, Measure, equivalent_to_P
from .rho import compute_rho, delta_rows
from .tree import MarketTree

_SELECTIONS = ("midpoint", "left", "right")
_INTERVAL_SLACK = 1e-12
_MIN_DOWN_PROB = 1e-15


@dataclass(frozen=True)
class CpsProcess:
    """Shadow price per node (levels 0..n_steps) and the slack that placed it."""

    n_steps: int
    s_tilde: Levels
    slack: Levels


@dataclass(frozen=True)
class CpsViolation:
    kind: str  # "bid_ask" | "effective_bound" | "martingale" | "slack"
    level: int
    node_index: int
    amount: float


def _pick(lo: float, hi: float, selection: str) -> float:
    if selection == "left":
        return lo
    if selection == "right":
        return hi
    return 0.5 * (lo + hi)


def construct_cps(
    tree: MarketTree,
    q: Measure,
    lam: float,
    selection: str = "midpoint",
    tol: float = 1e-12,
) -> CpsProcess:
    """Build a shadow price making (q, s_tilde) a CPS at cost lam.

    Requires q equivalent (all coordinates strictly inside (0,1)) and every
    spread gap >= -tol; a gap below that proves no CPS exists for this pair
    and raises CpsConstructionError naming the offending node.
    """
    if selection not in _SELECTIONS:
        raise ValueError(f"selection must be one of {_SELECTIONS}, got {selection!r}")
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if not equivalent_to_P(q):
        raise CpsConstructionError("measure not equivalent to P")
    tables = compute_rho(tree, q)
    gaps = delta_rows(tables, lam)
    for n in range(1, tree.n_steps + 1):
        for i, gap in enumerate(gaps[n - 1]):
            if gap < -tol:
                raise CpsConstructionError(
                    f"no lambda-CPS inducible by this measure at lambda={lam}: "
                    f"spread gap {gap} < 0 at level {n} node {i}",
                    level=n,
                    node_index=i,
                )
    spots = tree.node_prices()

    root_lo = (1 - lam) * float(tables.rho_minus[0][0]) * tree.s0
    root_hi = float(tables.rho_plus[0][0]) * tree.s0
    s_tilde: list[tuple[float, ...]] = [(_pick(root_lo, root_hi, selection),)]
    slack: list[tuple[float, ...]] = [(float(tables.rho_plus[0][0]) - s_tilde[0][0] / tree.s0,)]

    for n in range(1, tree.n_steps + 1):
        q_row = q.q[n - 1]
        alpha_row = tree.alpha[n - 1]
        beta_row = tree.beta[n - 1]
        rho_plus_here = tables.rho_plus[n - 1]
        r_plus_here = tables.r_plus[n - 1]
        rho_plus_child = tables.rho_plus[n]
        gap_child = gaps[n]
        new_prices = [0.0] * 2**n
        new_slack = [0.0] * 2**n
        for y in range(2 ** (n - 1)):
            q_up = float(q_row[y])
            one_minus = 1 - q_up
            if one_minus < _MIN_DOWN_PROB or q_up < _MIN_DOWN_PROB:
                raise CpsConstructionError(
                    f"up-probability {q_up} too close to the boundary at level {n} node {y}"
                )
            drive = float(alpha_row[y]) * q_up
            carried = (float(r_plus_here[y]) - float(rho_plus_here[y]) + slack[n - 1][y]) / drive
            down_pull = one_minus * float(beta_row[y]) * float(gap_child[2 * y]) / drive
            lo = max(0.0, carried - down_pull)
            hi = min(float(gap_child[2 * y + 1]), carried)
            # exact arithmetic guarantees lo <= hi; extremal selections leave
            # zero margin, so rounding can cross the endpoints by a scale-
            # dependent sliver that is clamped rather than fatal
            span_tol = _INTERVAL_SLACK + 1e-8 * max(1.0, abs(carried))
            if lo > hi + span_tol:
                raise RuntimeError(
                    f"empty feasible interval at level {n} node {y}: [{lo}, {hi}]; "
                    "gaps were nonnegative so this indicates a numerical breakdown"
                )
            lo = min(lo, hi)
            up_slack = _pick(lo, hi, selection)
            up_price = (float(rho_plus_child[2 * y + 1]) - up_slack) * spots[n][2 * y + 1]
            down_price = (s_tilde[n - 1][y] - q_up * up_price) / one_minus
            new_prices[2 * y + 1] = up_price
            new_prices[2 * y] = down_price
            new_slack[2 * y + 1] = up_slack
            new_slack[2 * y] = float(rho_plus_child[2 * y]) - down_price / spots[n][2 * y]
        s_tilde.append(tuple(new_prices))
        slack.append(tuple(new_slack))

    return CpsProcess(tree.n_steps, tuple(s_tilde), tuple(slack))


def verify_cps(
    tree: MarketTree,
    q: Measure,
    process: CpsProcess,
    lam: float,
    martingale_tol: float = 1e-10,
    bounds_tol: float = 1e-12,
) -> list[CpsViolation]:
    """Check all CPS invariants node-wise; an empty report means the pair passes.

    Checks, per node: the raw bid-ask band, the tighter effective band, the
    martingale identity under q (relative tolerance), and the slack bounds
    recomputed from s_tilde (not trusted from the process).
    """
    if process.n_steps != tree.n_steps or q.n_steps != tree.n_steps:
        raise ShapeError("tree, measure and process must agree on n_steps")
    if len(process.s_tilde) != tree.n_steps + 1:
        raise ShapeError(
            f"s_tilde: expected {tree.n_steps + 1} levels, got {len(process.s_tilde)}"
        )
    tables = compute_rho(tree, q)
    gaps = delta_rows(tables, lam)
    spots = tree.node_prices()
    violations: list[CpsViolation] = []

    for k in range(tree.n_steps + 1):
        if len(process.s_tilde[k]) != 2**k:
            raise ShapeError(f"s_tilde level {k}: expected {2**k} entries")
        for i in range(2**k):
            price = float(process.s_tilde[k][i])
            spot = spots[k][i]
            bid = (1 - lam) * spot
            if price < bid - bounds_tol * spot:
                violations.append(CpsViolation("bid_ask", k, i, bid - price))
            if price > spot + bounds_tol * spot:
                violations.append(CpsViolation("bid_ask", k, i, price - spot))
            eff_lo = (1 - lam) * float(tables.rho_minus[k][i]) * spot
            eff_hi = float(tables.rho_plus[k][i]) * spot
            if price < eff_lo - bounds_tol * spot:
                violations.append(CpsViolation("effective_bound", k, i, eff_lo - price))
            if price > eff_hi + bounds_tol * spot:
                violations.append(CpsViolation("effective_bound", k, i, price - eff_hi))
            slack_here = float(tables.rho_plus[k][i]) - price / spot
            if slack_here < -bounds_tol or slack_here > float(gaps[k][i]) + bounds_tol:
                violations.append(CpsViolation("slack", k, i, slack_here))

    for k in range(tree.n_steps):
        for y in range(2**k):
            q_up = float(q.q[k][y])
            parent = float(process.s_tilde[k][y])
            expected = (
                q_up * float(process.s_tilde[k + 1][2 * y + 1])
                + (1 - q_up) * float(process.s_tilde[k + 1][2 * y])
            )
            scale = max(abs(parent), abs(expected), 1e-300)
            if abs(expected - parent) > martingale_tol * scale:
                violations.append(CpsViolation("martingale", k, y, expected - parent))
    return violations


def cps_to_csv_rows(tree: MarketTree, process: CpsProcess) -> list[tuple]:
    """Rows (level, node_index, spot, s_tilde, ratio) for all nodes."""
    spots = tree.node_prices()
    rows = []
    for k in range(tree.n_steps + 1):
        for i in range(2**k):
            spot = spots[k][i]
            price = process.s_tilde[k][i]
            rows.append((k, i, spot, price, price / spot))
    return rows
