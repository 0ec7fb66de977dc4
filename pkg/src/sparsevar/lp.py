"""Dense two-phase primal simplex with Bland's rule.

Solves min c'x subject to G x <= h, x >= 0.  Small and deliberately
simple: the constrained l1 problems this package builds stay at desk
scale, so a dense tableau with anti-cycling pivoting is enough and easy
to verify.  The returned solution is recomputed from the original data
through the final basis, which keeps constraint residuals at rounding
level regardless of how many pivots the tableau went through.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InternalError, PivotLimitError, UnboundedError

__all__ = ["LpProblem", "LpSolution", "lp_solve"]


@dataclass(frozen=True)
class LpProblem:
    """Canonical-form linear program: min c'x s.t. G x <= h, x >= 0."""

    c: np.ndarray
    g_mat: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        g = np.asarray(self.g_mat, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if c.ndim != 1 or g.ndim != 2 or h.ndim != 1:
            raise ValueError("c and h must be vectors, g_mat a matrix")
        if g.shape != (h.size, c.size):
            raise ValueError(
                f"inconsistent dimensions: g_mat {g.shape}, c {c.size}, h {h.size}"
            )
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            raise ValueError("problem data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g_mat", g)
        object.__setattr__(self, "h", h)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.h.size


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    pivots: int


def _entering(costrow: np.ndarray, ncols: int, tol: float, bland: bool) -> int | None:
    reduced = costrow[:ncols]
    if bland:
        idx = np.flatnonzero(reduced < -tol)
        return int(idx[0]) if idx.size else None
    j = int(np.argmin(reduced))
    return j if reduced[j] < -tol else None


def _leaving(tableau, basis, col: int, tol: float) -> int | None:
    """Minimum-ratio row; ties resolved toward the smallest basic index,
    which is what Bland's anti-cycling rule requires."""
    column = tableau[:, col]
    mask = column > tol
    if not mask.any():
        return None
    rhs = np.maximum(tableau[:, -1], 0.0)
    ratios = np.full(column.shape, np.inf)
    ratios[mask] = rhs[mask] / column[mask]
    best = ratios.min()
    ties = np.flatnonzero(ratios <= best + 1e-12)
    return int(ties[np.argmin(basis[ties])])


def _pivot(tableau, costrow, basis, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    piv = tableau[row]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, piv)
    costrow -= costrow[col] * piv
    basis[row] = col


def lp_solve(problem: LpProblem, tol: float = 1e-9, max_pivots: int = 50000) -> LpSolution:
    """Solve the canonical-form LP; raises on infeasible/unbounded input.

    Bland's smallest-index rule is used for both entering and leaving
    choices, so the method terminates without cycling.  ``tol`` bounds the
    accepted constraint violation and optimality slack.
    """
    n, m = problem.n_vars, problem.n_rows
    if m == 0:
        if np.any(problem.c < -tol):
            raise UnboundedError("objective decreases along a free coordinate")
        return LpSolution(x=np.zeros(n), objective=0.0, pivots=0)

    # equality form [G I][x; s] = h; rows with negative rhs are flipped and
    # receive an artificial variable for the phase-1 basis
    neg = problem.h < 0
    n_art = int(neg.sum())
    ncols = n + m + n_art
    tableau = np.zeros((m, ncols + 1))
    tableau[:, :n] = problem.g_mat
    tableau[:, n : n + m] = np.eye(m)
    tableau[:, -1] = problem.h
    tableau[neg, :] *= -1.0
    basis = np.empty(m, dtype=int)
    art_col = n + m
    for i in range(m):
        if neg[i]:
            tableau[i, art_col] = 1.0
            basis[i] = art_col
            art_col += 1
        else:
            basis[i] = n + i

    pivots = 0

    def run_phase(costrow: np.ndarray, limit_cols: int, phase: int) -> None:
        # most-negative-cost pricing, falling back to Bland's smallest-index
        # rule while pivots stall at a degenerate vertex (anti-cycling)
        nonlocal pivots
        bland = False
        stalled = 0
        while True:
            col = _entering(costrow, limit_cols, tol, bland)
            if col is None:
                return
            row = _leaving(tableau, basis, col, tol)
            if row is None:
                if phase == 1:
                    raise InternalError("phase-1 objective unbounded; solver bug")
                raise UnboundedError("objective unbounded below on the feasible set")
            if pivots >= max_pivots:
                raise PivotLimitError(
                    f"pivot limit {max_pivots} reached in phase {phase}",
                    pivots=pivots,
                    last_iterate=tableau[:, -1].copy(),
                )
            objective_before = costrow[-1]
            _pivot(tableau, costrow, basis, row, col)
            pivots += 1
            if costrow[-1] != objective_before:
                bland = False
                stalled = 0
            else:
                stalled += 1
                if stalled >= 30:
                    bland = True

    dropped = np.zeros(m, dtype=bool)
    if n_art:
        # reduced phase-1 costs: subtract rows of the artificial basics
        cost = np.zeros(ncols + 1)
        cost[n + m : ncols] = 1.0
        costrow = cost - tableau[neg, :].sum(axis=0)
        run_phase(costrow, ncols, phase=1)
        if -costrow[-1] > 1e-7:
            raise InfeasibleError(
                f"no feasible point (phase-1 objective {-costrow[-1]:.3g})"
            )
        # pivot remaining artificials out of the basis, or drop their rows
        for i in range(m):
            if basis[i] >= n + m:
                piv_col = None
                for j in range(n + m):
                    if abs(tableau[i, j]) > tol:
                        piv_col = j
                        break
                if piv_col is None:
                    dropped[i] = True
                    tableau[i, :] = 0.0
                else:
                    dummy = np.zeros(ncols + 1)
                    _pivot(tableau, dummy, basis, i, piv_col)
                    pivots += 1

    cost = np.zeros(ncols + 1)
    cost[:n] = problem.c
    costrow = cost.copy()
    for i in range(m):
        if dropped[i]:
            continue
        cj = cost[basis[i]]
        if cj != 0.0:
            costrow -= cj * tableau[i]
    run_phase(costrow, n + m, phase=2)

    # recompute the basic solution from the original data for a clean result
    keep = ~dropped
    basis_cols = [basis[i] for i in range(m) if keep[i]]
    if any(b >= n + m for b in basis_cols):
        raise InternalError("artificial variable left in the final basis")
    eq = np.hstack([problem.g_mat, np.eye(m)])
    sub = eq[np.ix_(np.flatnonzero(keep), basis_cols)]
    try:
        xb = np.linalg.solve(sub, problem.h[keep])
    except np.linalg.LinAlgError as exc:  # pragma: no cover - basis is nonsingular
        raise InternalError(f"singular final basis: {exc}") from exc
    x = np.zeros(n)
    for value, j in zip(xb, basis_cols):
        if j < n:
            x[j] = value
    if np.any(x < -1e-7):
        raise InternalError(f"negative basic variable {x.min():.3g} in final solution")
    np.maximum(x, 0.0, out=x)
    violation = np.max(problem.g_mat @ x - problem.h, initial=0.0)
    if violation > 1e-7:
        raise InternalError(f"final solution violates constraints by {violation:.3g}")
    return LpSolution(x=x, objective=float(problem.c @ x), pivots=pivots)
