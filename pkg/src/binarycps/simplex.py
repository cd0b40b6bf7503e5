"""Phase-1 dense simplex for linear feasibility, with Bland's rule.

Solves "find x >= 0 with A x = b" by minimizing the sum of artificial
variables on a dense tableau.  Bland's smallest-index rule on both the
entering and the leaving choice guarantees termination without cycling; the
problem sizes here (tens of variables) make a dense tableau the simplest
correct choice.
"""
from __future__ import annotations

from typing import Optional

import numpy as np


def solve_feasibility(
    a_eq: np.ndarray,
    b_eq: np.ndarray,
    tol: float = 1e-9,
    max_iter: Optional[int] = None,
) -> Optional[np.ndarray]:
    """Return some x >= 0 with a_eq @ x = b_eq, or None when infeasible."""
    a = np.array(a_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.size:
        raise ValueError(f"incompatible LP shapes: A {a.shape}, b {b.shape}")
    m, n = a.shape
    flip = b < 0
    a[flip] *= -1
    b[flip] *= -1

    # tableau: original columns, artificial identity, rhs
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    # phase-1 objective row: reduced costs for basis = artificials
    tableau[m, :n] = -a.sum(axis=0)
    tableau[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    if max_iter is None:
        max_iter = 50 * (n + m + 10)
    for _ in range(max_iter):
        costs = tableau[m, : n + m]
        entering = -1
        for j in range(n + m):
            if costs[j] < -tol:
                entering = j
                break
        if entering < 0:
            break
        column = tableau[:m, entering]
        best_ratio = None
        leaving = -1
        for i in range(m):
            if column[i] > tol:
                ratio = tableau[i, -1] / column[i]
                if (
                    best_ratio is None
                    or ratio < best_ratio - tol
                    or (abs(ratio - best_ratio) <= tol and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            # phase-1 objective is bounded below by zero, so this cannot occur
            raise RuntimeError("phase-1 simplex detected an unbounded direction")
        pivot = tableau[leaving, entering]
        tableau[leaving] /= pivot
        for i in range(m + 1):
            if i != leaving and tableau[i, entering] != 0.0:
                tableau[i] -= tableau[i, entering] * tableau[leaving]
        basis[leaving] = entering
    else:
        raise RuntimeError("phase-1 simplex exceeded its iteration budget")

    residual = -tableau[m, -1]
    if residual > tol:
        return None
    x = np.zeros(n)
    for i, var in enumerate(basis):
        if var < n:
            x[var] = max(0.0, tableau[i, -1])
    return x
