"""Innovation-covariance estimation from fitted residuals.

Provides the residual builder, the plain sample covariance (divisor n - p),
its off-diagonal thresholded version with a random-split cross-validated
level, and the column-wise constrained l1 precision estimator solved by the
simplex module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InsufficientDataError
from .lp import LpProblem, lp_solve
from .model import SampleDesign, TimeSeries, build_design
from .thresholding import ThresholdRule, threshold_matrix

__all__ = [
    "ResidualMatrix",
    "CovCvSpec",
    "residuals",
    "residuals_from_design",
    "sample_cov",
    "thresholded_cov",
    "threshold_cov_at",
    "clime_precision",
    "clime_precision_from_cov",
]


@dataclass(frozen=True)
class ResidualMatrix:
    """Fitted one-step residuals, one row per usable time point."""

    values: np.ndarray
    centered: bool

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("residuals must form a matrix")
        if self.centered and v.shape[0] > 0:
            drift = np.max(np.abs(v.mean(axis=0)))
            if drift > 1e-10:
                raise ValueError(f"centered residuals have column mean {drift:.3g}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class CovCvSpec:
    """Random-split cross-validation plan for the threshold level.

    ``train_frac`` defaults to 1 - 1/log(rows); the grid runs log-spaced
    from the largest off-diagonal magnitude down to ``grid_ratio`` times it.
    """

    n_splits: int = 10
    train_frac: float | None = None
    grid_size: int = 30
    grid_ratio: float = 0.01
    seed: int = 0


def residuals(series: TimeSeries, estimate, center: bool = True) -> ResidualMatrix:
    """One-step residuals of an estimated coefficient block on a series."""
    b_hat = _coerce_b(estimate)
    d = series.d
    if b_hat.shape[1] != d or b_hat.shape[0] % d != 0:
        raise ValueError(f"coefficient block shape {b_hat.shape} does not match d={d}")
    p = b_hat.shape[0] // d
    design = build_design(series, p)
    return residuals_from_design(design, b_hat, center=center)


def residuals_from_design(design: SampleDesign, b_hat: np.ndarray, center: bool = True) -> ResidualMatrix:
    resid = design.y_mat - design.x_mat @ b_hat
    if center:
        resid = resid - resid.mean(axis=0, keepdims=True)
    return ResidualMatrix(values=resid, centered=center)


def _coerce_b(estimate) -> np.ndarray:
    if hasattr(estimate, "b_hat"):
        return np.asarray(estimate.b_hat, dtype=float)
    if isinstance(estimate, (list, tuple)):
        return np.vstack([np.asarray(a, dtype=float).T for a in estimate])
    return np.asarray(estimate, dtype=float)


def sample_cov(res: ResidualMatrix) -> np.ndarray:
    """Residual covariance with divisor equal to the number of rows."""
    v = res.values
    if v.shape[0] < 2:
        raise InsufficientDataError("need at least 2 residual rows")
    cov = v.T @ v / v.shape[0]
    return 0.5 * (cov + cov.T)


def threshold_cov_at(cov: np.ndarray, rule: ThresholdRule, lam: float) -> np.ndarray:
    """Apply a thresholding rule off-diagonal; the diagonal is never touched."""
    out = threshold_matrix(rule, lam, cov)
    np.fill_diagonal(out, np.diag(cov))
    return 0.5 * (out + out.T)


def thresholded_cov(
    res: ResidualMatrix, rule: ThresholdRule, selection: CovCvSpec | None = None
) -> np.ndarray:
    """Off-diagonal thresholded residual covariance.

    The level is chosen by random-split cross-validation: for each split the
    training covariance is thresholded on a log grid and scored by the
    Frobenius distance to the validation covariance; the grid point with the
    lowest average loss wins.
    """
    spec = selection or CovCvSpec()
    v = res.values
    n = v.shape[0]
    if n < 4:
        raise InsufficientDataError("need at least 4 residual rows for cross-validation")
    full = sample_cov(res)
    off = np.abs(full - np.diag(np.diag(full)))
    lam_top = float(off.max())
    if lam_top <= 0.0:
        return full.copy()
    grid = np.geomspace(lam_top, lam_top * spec.grid_ratio, spec.grid_size)
    frac = spec.train_frac if spec.train_frac is not None else 1.0 - 1.0 / np.log(n)
    n_train = int(round(n * frac))
    if n_train < 2 or n - n_train < 1:
        raise DegenerateInputError(
            f"degenerate split: {n_train} train rows out of {n}"
        )
    rng = np.random.default_rng(spec.seed)
    losses = np.zeros(spec.grid_size)
    for _ in range(spec.n_splits):
        perm = rng.permutation(n)
        train = v[perm[:n_train]]
        valid = v[perm[n_train:]]
        cov_train = train.T @ train / n_train
        cov_valid = valid.T @ valid / (n - n_train)
        for g, lam in enumerate(grid):
            diff = threshold_cov_at(cov_train, rule, float(lam)) - cov_valid
            losses[g] += float(np.sum(diff * diff))
    lam_star = float(grid[int(np.argmin(losses))])
    return threshold_cov_at(full, rule, lam_star)


def clime_precision_from_cov(
    sigma_hat: np.ndarray, lam: float, tol: float = 1e-9, max_pivots: int = 50000
) -> np.ndarray:
    """Column-wise constrained l1 precision estimate of a covariance matrix.

    Column j solves min ||b||_1 s.t. ||sigma_hat b - e_j||_max <= lam as a
    linear program; the two candidates for each entry are reconciled by
    keeping the one of smaller magnitude, which makes the output symmetric.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    d = sigma_hat.shape[0]
    omega = np.empty((d, d))
    block = np.vstack([np.hstack([sigma_hat, -sigma_hat]), np.hstack([-sigma_hat, sigma_hat])])
    cost = np.ones(2 * d)
    for j in range(d):
        e_j = np.zeros(d)
        e_j[j] = 1.0
        h = np.concatenate([lam + e_j, lam - e_j])
        sol = lp_solve(LpProblem(c=cost, g_mat=block, h=h), tol=tol, max_pivots=max_pivots)
        omega[:, j] = sol.x[:d] - sol.x[d:]
    smaller = np.where(np.abs(omega) <= np.abs(omega.T), omega, omega.T)
    return smaller


def clime_precision(
    res: ResidualMatrix, lam: float, tol: float = 1e-9, max_pivots: int = 50000
) -> np.ndarray:
    """Constrained l1 precision estimate from residuals."""
    return clime_precision_from_cov(sample_cov(res), lam, tol=tol, max_pivots=max_pivots)
