"""Critical-cost solver: 1 minus the largest attainable rho score.

The supremum of the score over all measures on the closed coordinate cube is
attained, so the solver searches the cube directly and reports equivalence to
the reference measure separately.  Pipeline: explicit closed form when the
market is semi-homogeneous and a covered regime applies, the exact sandwich
when lower and upper bound coincide, otherwise a deterministic grid scan
followed by multi-start simplex refinement.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bounds import (
    SemiHomogeneousSpec,
    closed_form_lambda_c,
    lower_bound_lambda_star,
    one_step_greedy_measure,
    q_star,
    upper_bound_semi_homogeneous,
)
from .errors import GridCapError
from .measures import DEFAULT_GRID_CAP, Measure, equivalent_to_P, flat_dim, grid_count
from .rho import compute_rho, min_ratio_node, rho_score, score_batch, score_one
from .tree import MarketTree, emm_q0, frictionless_no_arbitrage

_SANDWICH_TOL = 1e-12
_CHUNK = 200_000


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the numeric path; defaults reproduce the reported results.

    grid_step None picks the subdivision count from the cube dimension (16 up
    to dimension 7, 4 up to 15, pure random scan beyond); grids larger than
    scan_cap are sampled instead of enumerated.  numeric_margin is the
    uncertainty declared on grid+refine estimates, used by consistency checks.
    """

    grid_step: Optional[int] = None
    scan_cap: int = 100_000
    refine_iters: int = 2000
    multistart: int = 16
    seed: int = 0
    use_closed_form: bool = True
    use_sandwich: bool = True
    numeric_margin: float = 0.02
    simplex_diameter_tol: float = 1e-9


@dataclass(frozen=True)
class LambdaCReport:
    """Critical-cost estimate with bounds and provenance."""

    lambda_c: float
    argmax_measure: Measure
    lower: float
    upper: Optional[float]
    method: str
    grid_step: Optional[int]
    certified_gap: Optional[float]
    numeric_margin: float
    seed: int

    @property
    def certified(self) -> bool:
        return self.method in ("closed_form", "sandwich_exact")

    def to_json_dict(self) -> dict:
        return {
            "lambda_c": self.lambda_c,
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method,
            "grid_step": self.grid_step,
            "certified_gap": self.certified_gap,
            "numeric_margin": self.numeric_margin,
            "seed": self.seed,
            "argmax_measure": [list(level) for level in self.argmax_measure.q],
        }


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of the membership test for one (measure, lambda) pair."""

    status: str  # "member" | "boundary_only" | "non_member"
    score: float
    witness: Optional[tuple[int, int]]  # (level, node_index) of the worst ratio


def brute_force_sup_rho(
    tree: MarketTree, m: int, cap: int = DEFAULT_GRID_CAP
) -> tuple[float, Measure]:
    """Exact maximum of the score over the full coordinate grid {0,1/m,..,1}.

    Ties resolve to the first measure in enumeration order (first flattened
    coordinate varying slowest).  Refuses oversized grids.
    """
    if m < 1:
        raise ValueError("grid subdivisions m must be >= 1")
    dim = flat_dim(tree.n_steps)
    count = grid_count(tree.n_steps, m)
    if count > cap:
        raise GridCapError(
            f"grid of {count} measures exceeds the cap of {cap}; reduce m or the horizon"
        )
    best_score = -np.inf
    best_vec: Optional[np.ndarray] = None
    for start in range(0, count, _CHUNK):
        stop = min(start + _CHUNK, count)
        block = _grid_block(dim, m, start, stop)
        scores = score_batch(tree, block)
        k = int(np.argmax(scores))
        if scores[k] > best_score:
            best_score = float(scores[k])
            best_vec = block[k].copy()
    assert best_vec is not None
    return best_score, Measure.from_flat(tree.n_steps, [float(v) for v in best_vec])


def _grid_block(dim: int, m: int, start: int, stop: int) -> np.ndarray:
    """Rows start..stop of the full grid in enumeration order."""
    values = np.arange(m + 1) / m
    idx = np.arange(start, stop, dtype=np.int64)
    block = np.empty((idx.size, dim))
    rem = idx.copy()
    for j in range(dim - 1, -1, -1):
        block[:, j] = values[rem % (m + 1)]
        rem //= m + 1
    return block


def _adaptive_grid_step(dim: int) -> Optional[int]:
    if dim <= 7:
        return 16
    if dim <= 15:
        return 4
    return None


def _nelder_mead_box(
    fn: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_iter: int,
    diam_tol: float,
) -> tuple[np.ndarray, float]:
    """Maximize fn over the unit box with a clamped Nelder-Mead simplex.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    Stops when the simplex diameter falls below diam_tol or after max_iter
    iterations.  Fully deterministic.
    """
    dim = x0.size
    points = [np.clip(x0.astype(float), 0.0, 1.0)]
    for i in range(dim):
        vertex = points[0].copy()
        step = 0.1 if vertex[i] <= 0.9 else -0.1
        vertex[i] = min(1.0, max(0.0, vertex[i] + step))
        points.append(vertex)
    simplex = np.array(points)
    values = np.array([-fn(p) for p in simplex])

    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if np.max(np.abs(simplex - simplex[0])) < diam_tol:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = np.clip(centroid + (centroid - worst), 0.0, 1.0)
        f_reflected = -fn(reflected)
        if f_reflected < values[0]:
            expanded = np.clip(centroid + 2.0 * (centroid - worst), 0.0, 1.0)
            f_expanded = -fn(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = np.clip(centroid + 0.5 * (reflected - centroid), 0.0, 1.0)
            else:
                contracted = np.clip(centroid - 0.5 * (centroid - worst), 0.0, 1.0)
            f_contracted = -fn(contracted)
            if f_contracted < min(f_reflected, values[-1]):
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                simplex = simplex[0] + 0.5 * (simplex - simplex[0])
                values = np.array([values[0]] + [-fn(p) for p in simplex[1:]])
    k = int(np.argmin(values))
    return simplex[k], -float(values[k])


def _numeric_search(
    tree: MarketTree, config: SolverConfig
) -> tuple[float, np.ndarray, Optional[int]]:
    """Grid/random scan plus multi-start refinement; returns (score, vector, m)."""
    dim = flat_dim(tree.n_steps)
    m = config.grid_step if config.grid_step is not None else _adaptive_grid_step(dim)
    rng = np.random.default_rng(config.seed)

    if m is not None and grid_count(tree.n_steps, m) <= config.scan_cap:
        count = grid_count(tree.n_steps, m)
        blocks = (_grid_block(dim, m, s, min(s + _CHUNK, count)) for s in range(0, count, _CHUNK))
    elif m is not None:
        blocks = iter([rng.integers(0, m + 1, size=(config.scan_cap, dim)) / m])
    else:
        blocks = iter([rng.random((config.scan_cap, dim))])

    candidates: list[tuple[float, np.ndarray]] = []
    scan_pool: list[tuple[float, np.ndarray]] = []
    for block in blocks:
        scores = score_batch(tree, np.asarray(block, dtype=float))
        top = np.argsort(scores, kind="stable")[::-1][: config.multistart]
        for k in top:
            scan_pool.append((float(scores[k]), np.asarray(block[k], dtype=float).copy()))
    scan_pool.sort(key=lambda sv: (-sv[0], sv[1].tolist()))
    candidates.extend(scan_pool[: config.multistart])

    greedy = one_step_greedy_measure(tree).flat()
    candidates.append((score_one(tree, greedy), greedy))

    starts: list[np.ndarray] = []
    seen: set[bytes] = set()
    for _, vec in candidates:
        key = vec.tobytes()
        if key not in seen:
            seen.add(key)
            starts.append(vec)
    while len(starts) < config.multistart + 1:
        starts.append(rng.random(dim))

    results = list(candidates)
    if config.refine_iters > 0:
        fn = lambda x: score_one(tree, x)
        for x0 in starts[: config.multistart + 1]:
            x_best, f_best = _nelder_mead_box(
                fn, x0, config.refine_iters, config.simplex_diameter_tol
            )
            results.append((f_best, x_best))

    best_score = max(score for score, _ in results)
    best_vec = min(vec.tolist() for score, vec in results if score == best_score)
    return best_score, np.array(best_vec), m


def solve_lambda_c(tree: MarketTree, config: Optional[SolverConfig] = None) -> LambdaCReport:
    """Estimate the critical cost with bounds, provenance and an achieving measure."""
    config = config or SolverConfig()
    lower = lower_bound_lambda_star(tree)
    semi = SemiHomogeneousSpec.from_tree(tree)
    upper = upper_bound_semi_homogeneous(semi) if semi is not None else None

    if config.use_closed_form and all(
        b <= 1 <= a
        for level_a, level_b in zip(tree.alpha, tree.beta)
        for a, b in zip(level_a, level_b)
    ):
        # the one-step greedy measure scores exactly one on a free band, so
        # zero cost is certified without any search, homogeneous or not
        return LambdaCReport(
            lambda_c=0.0,
            argmax_measure=one_step_greedy_measure(tree),
            lower=lower,
            upper=upper,
            method="closed_form",
            grid_step=None,
            certified_gap=(upper - lower) if upper is not None else None,
            numeric_margin=0.0,
            seed=config.seed,
        )

    if semi is not None and config.use_closed_form:
        value = closed_form_lambda_c(semi)
        if value is not None:
            return LambdaCReport(
                lambda_c=value,
                argmax_measure=q_star(semi),
                lower=lower,
                upper=upper,
                method="closed_form",
                grid_step=None,
                certified_gap=(upper - lower) if upper is not None else None,
                numeric_margin=0.0,
                seed=config.seed,
            )

    if config.use_sandwich and upper is not None and upper - lower <= _SANDWICH_TOL:
        return LambdaCReport(
            lambda_c=upper,
            argmax_measure=q_star(semi),
            lower=lower,
            upper=upper,
            method="sandwich_exact",
            grid_step=None,
            certified_gap=upper - lower,
            numeric_margin=0.0,
            seed=config.seed,
        )

    best_score, best_vec, m = _numeric_search(tree, config)
    value = 1 - best_score
    value = max(value, lower)
    if upper is not None:
        value = min(value, upper)
    method = "grid+refine" if config.refine_iters > 0 else "grid"
    return LambdaCReport(
        lambda_c=value,
        argmax_measure=Measure.from_flat(tree.n_steps, [float(v) for v in best_vec]),
        lower=lower,
        upper=upper,
        method=method,
        grid_step=m,
        certified_gap=(upper - lower) if upper is not None else None,
        numeric_margin=config.numeric_margin,
        seed=config.seed,
    )


def m_lambda_membership(
    tree: MarketTree, q: Measure, lam: float, tol: float = 1e-9
) -> MembershipResult:
    """Does q induce a consistent price system at cost lam?

    member: equivalent measure with score >= 1 - lam (within tol).
    boundary_only: score condition holds but some coordinate sits on {0, 1}.
    non_member: score too small; the witness is the worst-ratio node.
    """
    tables = compute_rho(tree, q)
    score = float(rho_score(tables))
    if score >= 1 - lam - tol:
        if equivalent_to_P(q):
            return MembershipResult("member", score, None)
        return MembershipResult("boundary_only", score, None)
    return MembershipResult("non_member", score, min_ratio_node(tables))


def characterize_m_lambda_c(tree: MarketTree) -> Optional[Measure]:
    """The unique measure inducing a CPS at the critical cost itself, if any.

    Nonempty exactly when the frictionless market excludes arbitrage, in which
    case the critical cost is zero and the martingale measure is the single
    member.
    """
    if frictionless_no_arbitrage(tree):
        return emm_q0(tree)
    return None
