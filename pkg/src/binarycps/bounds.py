"""Closed forms and bounds for the critical transaction cost.

The one-step market is solvable in closed form, which yields a general lower
bound node by node.  For markets whose factors depend on the step but not the
node, collapsing each step to its best one-step choice gives a scalar ladder
whose contiguous products bound the critical cost from above; in three regimes
(all up factors <= 1, all down factors >= 1, or neither binding) the two sides
meet and the critical cost is explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DomainError
from .measures import Measure
from .tree import MarketTree

_LOG_SPACE_LO = 1e-8
_LOG_SPACE_HI = 1e8


@dataclass(frozen=True)
class SemiHomogeneousSpec:
    """Step-dependent, node-independent factors 0 < beta_n < alpha_n."""

    n_steps: int
    alpha_seq: tuple[float, ...]
    beta_seq: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_seq", tuple(self.alpha_seq))
        object.__setattr__(self, "beta_seq", tuple(self.beta_seq))
        if len(self.alpha_seq) != self.n_steps or len(self.beta_seq) != self.n_steps:
            raise DomainError("alpha_seq and beta_seq must have n_steps entries")
        for n, (a, b) in enumerate(zip(self.alpha_seq, self.beta_seq), start=1):
            if not 0 < b < a:
                raise DomainError(f"step {n}: requires 0 < beta < alpha, got beta={b}, alpha={a}")

    @classmethod
    def from_tree(cls, tree: MarketTree) -> Optional["SemiHomogeneousSpec"]:
        """Detect node-independence; None when any level is not constant."""
        alpha_seq, beta_seq = [], []
        for level_a, level_b in zip(tree.alpha, tree.beta):
            if any(v != level_a[0] for v in level_a) or any(v != level_b[0] for v in level_b):
                return None
            alpha_seq.append(level_a[0])
            beta_seq.append(level_b[0])
        return cls(tree.n_steps, tuple(alpha_seq), tuple(beta_seq))

    def to_tree(self, s0: float = 1.0) -> MarketTree:
        return MarketTree.semi_homogeneous(self.alpha_seq, self.beta_seq, s0)


@dataclass(frozen=True)
class GammaLadder:
    """Scalar collapse of a semi-homogeneous market.

    gamma[n-1] is the binding factor of step n (alpha when alpha <= 1, beta
    when beta >= 1, else 1).  varrho_plus / varrho_minus run the same backward
    recursion as the per-node tables but on scalars, rows 1..n_steps+1.
    window_products collects the products of gamma over every contiguous
    window of steps, deduplicated and sorted.
    """

    gamma: tuple[float, ...]
    varrho_plus: tuple[float, ...]
    varrho_minus: tuple[float, ...]
    window_products: tuple[float, ...]


def one_step_lambda_c(alpha: float, beta: float) -> float:
    """Critical cost of the one-step market: 1 - min(alpha, 1/beta, 1)."""
    if not 0 < beta < alpha:
        raise DomainError(f"requires 0 < beta < alpha, got beta={beta}, alpha={alpha}")
    return 1 - min(alpha, 1 / beta, 1)


def lower_bound_lambda_star(tree: MarketTree) -> float:
    """Worst one-step critical cost over all nodes; valid for any tree."""
    worst = 1.0
    for level_a, level_b in zip(tree.alpha, tree.beta):
        for a, b in zip(level_a, level_b):
            worst = min(worst, a, 1 / b)
    return 1 - worst


def one_step_greedy_measure(tree: MarketTree) -> Measure:
    """Per node, the up-probability maximizing the one-step score.

    1 when alpha <= 1, 0 when beta >= 1, the martingale probability otherwise.
    On a frictionless tree this is exactly the martingale measure.
    """
    levels = []
    for level_a, level_b in zip(tree.alpha, tree.beta):
        row = []
        for a, b in zip(level_a, level_b):
            if a <= 1:
                row.append(1.0)
            elif b >= 1:
                row.append(0.0)
            else:
                row.append((1 - b) / (a - b))
        levels.append(tuple(row))
    return Measure(tree.n_steps, tuple(levels))


def q_star(spec: SemiHomogeneousSpec) -> Measure:
    """Space-constant greedy measure of a semi-homogeneous market."""
    return one_step_greedy_measure(spec.to_tree())


def _window_log_sums(gamma: Sequence[float]) -> list[float]:
    logs = [math.log(g) for g in gamma]
    sums: list[float] = []
    for start in range(len(gamma)):
        acc = 0.0
        for k in range(start, len(gamma)):
            acc += logs[k]
            sums.append(acc)
    return sums


def _has_extreme_factor(gamma: Sequence[float]) -> bool:
    return any(g < _LOG_SPACE_LO or g > _LOG_SPACE_HI for g in gamma)


def _safe_exp(value: float) -> float:
    # math.exp raises on overflow; saturate like the products themselves would
    if value > 709.0:
        return math.inf
    return math.exp(value)


def _windows(gamma: Sequence[float]) -> list[float]:
    """All contiguous products of gamma.

    With extreme factors the products are accumulated in log-space, so the
    order of multiplication cannot overflow early; values outside the double
    range still clamp to 0 or inf on conversion, which only the stored table
    sees (the bound itself is computed from the log sums directly).
    """
    if _has_extreme_factor(gamma):
        return [_safe_exp(s) for s in _window_log_sums(gamma)]
    products: list[float] = []
    for start in range(len(gamma)):
        acc = 1.0
        for k in range(start, len(gamma)):
            acc *= gamma[k]
            products.append(acc)
    return products


def gamma_ladder(spec: SemiHomogeneousSpec) -> GammaLadder:
    """Collapse the spec to scalars and cross-check the recursion.

    The backward recursion must agree with prefix-product extremes (the
    recursion value at step n equals the min resp. max over {1} and the
    products of gamma starting at step n); a mismatch indicates a broken
    invariant and raises RuntimeError.
    """
    gamma = tuple(
        a if a <= 1 else (b if b >= 1 else 1.0)
        for a, b in zip(spec.alpha_seq, spec.beta_seq)
    )
    n = spec.n_steps
    varrho_plus = [1.0] * (n + 1)
    varrho_minus = [1.0] * (n + 1)
    for step in range(n, 0, -1):
        varrho_plus[step - 1] = min(1.0, gamma[step - 1] * varrho_plus[step])
        varrho_minus[step - 1] = max(1.0, gamma[step - 1] * varrho_minus[step])
    for step in range(1, n + 1):
        prefixes = [1.0]
        acc = 1.0
        for k in range(step - 1, n):
            acc *= gamma[k]
            prefixes.append(acc)
        lo, hi = min(prefixes), max(prefixes)
        if not (
            math.isclose(varrho_plus[step - 1], lo, rel_tol=1e-12, abs_tol=1e-300)
            and math.isclose(varrho_minus[step - 1], hi, rel_tol=1e-12)
        ):
            raise RuntimeError(
                f"ladder recursion disagrees with prefix products at step {step}"
            )
    deduped = tuple(sorted(set(_windows(gamma))))
    return GammaLadder(gamma, tuple(varrho_plus), tuple(varrho_minus), deduped)


def upper_bound_semi_homogeneous(spec: SemiHomogeneousSpec) -> float:
    """1 - min(1, smallest window product, 1 / largest window product)."""
    ladder = gamma_ladder(spec)
    if _has_extreme_factor(ladder.gamma):
        sums = _window_log_sums(ladder.gamma)
        return 1 - math.exp(min(0.0, min(sums), -max(sums)))
    lo = ladder.window_products[0]
    hi = ladder.window_products[-1]
    return 1 - min(1.0, lo, 1 / hi)


def closed_form_lambda_c(spec: SemiHomogeneousSpec) -> Optional[float]:
    """Explicit critical cost in the three covered regimes, else None.

    All alpha <= 1: 1 - prod(alpha).  All beta >= 1: 1 - prod(1/beta).
    All beta <= 1 <= alpha: 0.  Mixed regimes are not covered and fall back
    to the numeric solver.
    """
    alphas, betas = spec.alpha_seq, spec.beta_seq
    if all(a <= 1 for a in alphas):
        prod = 1.0
        for a in alphas:
            prod *= a
        return 1 - prod
    if all(b >= 1 for b in betas):
        prod = 1.0
        for b in betas:
            prod *= 1 / b
        return 1 - prod
    if all(b <= 1 <= a for a, b in zip(alphas, betas)):
        return 0.0
    return None
