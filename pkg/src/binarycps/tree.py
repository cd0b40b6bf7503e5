"""Binary market trees with node-dependent up/down gross returns.

The stock multiplies by alpha[n-1][i] (up) or beta[n-1][i] (down) when moving
from node i at level n-1 to level n.  Nodes carry the canonical root-first bit
index: appending an up move to node i gives child 2i+1, a down move gives 2i.
Interest rates are folded into the factors at construction time, so the whole
package works in bond-numeraire units.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DomainError, ShapeError
from .measures import Levels, Measure, check_levels

_VALID_MOVES = frozenset("UD")


@dataclass(frozen=True)
class NodePath:
    """Path from the root; moves[i] is the (i+1)-th jump, "U" or "D"."""

    moves: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "moves", tuple(self.moves))
        bad = [m for m in self.moves if m not in _VALID_MOVES]
        if bad:
            raise ValueError(f"moves must be 'U' or 'D', got {bad[0]!r}")

    @property
    def level(self) -> int:
        return len(self.moves)

    @property
    def index(self) -> int:
        """Canonical integer index: bit i (root-first) is 1 iff move i is up."""
        idx = 0
        for move in self.moves:
            idx = 2 * idx + (1 if move == "U" else 0)
        return idx

    @classmethod
    def root(cls) -> "NodePath":
        return cls(())

    @classmethod
    def from_string(cls, text: str) -> "NodePath":
        return cls(tuple(text.upper()))

    @classmethod
    def from_index(cls, level: int, index: int) -> "NodePath":
        if not 0 <= index < 2**level:
            raise ValueError(f"index {index} out of range for level {level}")
        moves = tuple("U" if (index >> (level - 1 - i)) & 1 else "D" for i in range(level))
        return cls(moves)


@dataclass(frozen=True)
class Violation:
    level: int
    node_index: int
    reason: str


@dataclass(frozen=True)
class MarketTree:
    """Depth-n_steps binary market: initial price s0 and per-node gross returns.

    Immutable after construction; construction only normalizes the containers,
    all shape and value checking lives in validate_market so that defective
    inputs can be inspected rather than rejected blindly.
    """

    n_steps: int
    s0: float
    alpha: Levels
    beta: Levels

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(tuple(level) for level in self.alpha))
        object.__setattr__(self, "beta", tuple(tuple(level) for level in self.beta))

    @classmethod
    def homogeneous(cls, n_steps: int, alpha: float, beta: float, s0: float = 1.0) -> "MarketTree":
        return cls.semi_homogeneous([alpha] * n_steps, [beta] * n_steps, s0)

    @classmethod
    def semi_homogeneous(
        cls, alpha_seq: Sequence[float], beta_seq: Sequence[float], s0: float = 1.0
    ) -> "MarketTree":
        if len(alpha_seq) != len(beta_seq):
            raise ShapeError("alpha_seq and beta_seq must have equal length")
        n_steps = len(alpha_seq)
        return cls(
            n_steps,
            s0,
            tuple(tuple([a] * 2 ** (n - 1)) for n, a in enumerate(alpha_seq, 1)),
            tuple(tuple([b] * 2 ** (n - 1)) for n, b in enumerate(beta_seq, 1)),
        )

    def node_prices(self) -> tuple[tuple[float, ...], ...]:
        """Spot price per node for levels 0..n_steps (root level has one entry)."""
        levels = [(self.s0,)]
        for n in range(1, self.n_steps + 1):
            prev = levels[-1]
            alpha, beta = self.alpha[n - 1], self.beta[n - 1]
            row = []
            for i in range(2**n):
                parent = i >> 1
                factor = alpha[parent] if i & 1 else beta[parent]
                row.append(prev[parent] * factor)
            levels.append(tuple(row))
        return tuple(levels)


@dataclass(frozen=True)
class DriftParametrization:
    """Additive parametrization: factors 1 + a_n + u_n(y) and 1 + a_n + d_n(y).

    a has n_steps + 1 entries (a[0] enters the initial price), u and d are
    per-node arrays shaped like the tree, r holds optional per-step interest
    rates (defaults to zero everywhere).
    """

    n_steps: int
    x0: float
    a: tuple[float, ...]
    u: Levels
    d: Levels
    r: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "u", tuple(tuple(level) for level in self.u))
        object.__setattr__(self, "d", tuple(tuple(level) for level in self.d))
        if self.r is not None:
            object.__setattr__(self, "r", tuple(self.r))


def validate_market(tree: MarketTree) -> list[Violation]:
    """Return every node violating 0 < beta < alpha, plus s0 positivity.

    Malformed per-level shapes raise ShapeError instead, naming the level and
    the expected length; an empty list means the tree is valid.
    """
    if tree.n_steps < 1:
        raise ShapeError(f"n_steps must be >= 1, got {tree.n_steps}")
    check_levels(tree.alpha, tree.n_steps, "alpha")
    check_levels(tree.beta, tree.n_steps, "beta")
    violations: list[Violation] = []
    if not tree.s0 > 0:
        violations.append(Violation(0, 0, f"s0 = {tree.s0} must be strictly positive"))
    for n in range(1, tree.n_steps + 1):
        for i, (a, b) in enumerate(zip(tree.alpha[n - 1], tree.beta[n - 1])):
            if not b > 0:
                violations.append(Violation(n, i, f"beta = {b} must be strictly positive"))
            if not a > 0:
                violations.append(Violation(n, i, f"alpha = {a} must be strictly positive"))
            if b >= a:
                violations.append(Violation(n, i, f"beta = {b} >= alpha = {a}"))
    return violations


def require_valid(tree: MarketTree) -> None:
    violations = validate_market(tree)
    if violations:
        first = violations[0]
        raise DomainError(
            f"invalid market: level {first.level} node {first.node_index}: {first.reason}"
            + (f" (+{len(violations) - 1} more)" if len(violations) > 1 else "")
        )


def from_drift(p: DriftParametrization) -> MarketTree:
    """Build the numeraire-normalized tree from the additive parametrization."""
    n = p.n_steps
    if len(p.a) != n + 1:
        raise ShapeError(f"a: expected {n + 1} entries (a_0..a_{n}), got {len(p.a)}")
    check_levels(p.u, n, "u")
    check_levels(p.d, n, "d")
    rates = p.r if p.r is not None else tuple([0.0] * n)
    if len(rates) != n:
        raise ShapeError(f"r: expected {n} entries, got {len(rates)}")
    for k, rate in enumerate(rates, start=1):
        if rate <= -1:
            raise DomainError(f"interest rate r_{k} = {rate} must exceed -1")
    s0 = 1 + p.a[0] + p.x0
    if s0 <= 0:
        raise DomainError(f"initial price 1 + a_0 + x0 = {s0} must be strictly positive")
    alpha, beta = [], []
    for step in range(1, n + 1):
        a_n, rate = p.a[step], rates[step - 1]
        row_a, row_b = [], []
        for i, (uv, dv) in enumerate(zip(p.u[step - 1], p.d[step - 1])):
            if dv >= uv:
                raise DomainError(f"level {step} node {i}: requires d < u, got d={dv}, u={uv}")
            up = (1 + a_n + uv) / (1 + rate)
            down = (1 + a_n + dv) / (1 + rate)
            if up <= 0 or down <= 0:
                raise DomainError(
                    f"level {step} node {i}: gross return not strictly positive "
                    f"(alpha={up}, beta={down})"
                )
            row_a.append(up)
            row_b.append(down)
        alpha.append(tuple(row_a))
        beta.append(tuple(row_b))
    return MarketTree(n, s0, tuple(alpha), tuple(beta))


def frictionless_no_arbitrage(tree: MarketTree) -> bool:
    """True iff beta < 1 < alpha strictly at every node."""
    return all(
        b < 1 < a
        for level_a, level_b in zip(tree.alpha, tree.beta)
        for a, b in zip(level_a, level_b)
    )


def emm_q0(tree: MarketTree) -> Measure:
    """The unique up-probabilities making the spot a martingale, (1-beta)/(alpha-beta)."""
    if not frictionless_no_arbitrage(tree):
        raise DomainError("frictionless market admits arbitrage; Q0 undefined")
    return Measure(
        tree.n_steps,
        tuple(
            tuple((1 - b) / (a - b) for a, b in zip(level_a, level_b))
            for level_a, level_b in zip(tree.alpha, tree.beta)
        ),
    )


def spot_price(tree: MarketTree, node: NodePath):
    """Initial price times the product of the chosen factors along the path."""
    if node.level > tree.n_steps:
        raise DomainError(f"node level {node.level} exceeds horizon {tree.n_steps}")
    price = tree.s0
    idx = 0
    for step, move in enumerate(node.moves):
        if move == "U":
            price = price * tree.alpha[step][idx]
            idx = 2 * idx + 1
        else:
            price = price * tree.beta[step][idx]
            idx = 2 * idx
    return price


def market_from_config(cfg: dict) -> MarketTree:
    """Build a tree from the JSON market config schema.

    Modes: "node" (arrays-of-arrays), "semi" (flat per-step arrays),
    "homogeneous" (scalars), "drift" (additive parametrization, s0 derived).
    """
    try:
        n_steps = int(cfg["N"])
        mode = cfg.get("mode", "node")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"market config: missing or invalid field: {exc}") from exc
    if mode == "drift":
        p = DriftParametrization(
            n_steps=n_steps,
            x0=float(cfg["x0"]),
            a=tuple(cfg["a"]),
            u=tuple(tuple(level) for level in cfg["u"]),
            d=tuple(tuple(level) for level in cfg["d"]),
            r=tuple(cfg["r"]) if "r" in cfg else None,
        )
        return from_drift(p)
    s0 = float(cfg.get("s0", 1.0))
    alpha, beta = cfg["alpha"], cfg["beta"]
    if mode == "homogeneous":
        return MarketTree.homogeneous(n_steps, float(alpha), float(beta), s0)
    if mode == "semi":
        return MarketTree.semi_homogeneous([float(v) for v in alpha], [float(v) for v in beta], s0)
    if mode == "node":
        return MarketTree(n_steps, s0, tuple(map(tuple, alpha)), tuple(map(tuple, beta)))
    raise ValueError(f"market config: unknown mode {mode!r}")
