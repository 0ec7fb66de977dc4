"""Penalty-level grids and information-criterion selection.

BIC uses the Gaussian profile form N log(RSS/N) + df log N with df the
nonzero count.  ERIC follows the penalized-Gaussian version of its
reference: N log(RSS/N) + 2 nu df log(N (RSS/N) / lambda).  Both formulas
are conventions of this package, recorded in every fit's provenance,
because the selection rules are named but not spelled out anywhere
upstream of this code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateFitError, DegenerateInputError, SparseVarError
from .model import SampleDesign

__all__ = [
    "TuningRule",
    "Selection",
    "lambda_grid",
    "bic_score",
    "eric_score",
    "select",
]

DF_TOL = 1e-10


@dataclass(frozen=True)
class TuningRule:
    """Which criterion scores the grid: ``bic`` or ``eric`` (with exponent nu)."""

    kind: str
    nu: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bic", "eric"):
            raise ValueError(f"unknown tuning rule {self.kind!r}")
        if self.kind == "eric" and self.nu <= 0:
            raise ValueError("eric requires nu > 0")

    def label(self) -> str:
        return self.kind.upper()


def lambda_grid(
    design: SampleDesign,
    j: int | None = None,
    size: int = 50,
    ratio: float = 0.001,
    weights: np.ndarray | None = None,
    kind: str = "lasso",
) -> np.ndarray:
    """Descending log-spaced penalty grid.

    The top value is the smallest level at which the penalized solution is
    identically zero: max |X'Y e_j| / N for a response row (the global max
    for ``j=None``), divided entrywise by the penalty weights for a
    weighted lasso.  For the Dantzig constraint the zero solution is
    feasible exactly at max |X'Y e_j| / N, independent of weights.
    """
    if size < 2:
        raise ValueError("grid size must be >= 2")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if kind not in ("lasso", "dantzig"):
        raise ValueError(f"unknown grid kind {kind!r}")
    vals = np.abs(design.cross) if j is None else np.abs(design.cross[:, j])
    if weights is not None and kind == "lasso":
        w = np.asarray(weights, dtype=float)
        vals = np.where(w > 0, vals / np.where(w > 0, w, 1.0), 0.0)
    lam_max = float(vals.max())
    if lam_max <= 0.0:
        raise DegenerateInputError("design and response are uncorrelated; empty grid")
    return np.geomspace(lam_max, lam_max * ratio, size)


def bic_score(rss: float, df: int, n_eff: int) -> float:
    """Gaussian profile BIC: N log(RSS/N) + df log N."""
    if n_eff <= 0:
        raise ValueError("n_eff must be positive")
    if rss <= 0:
        raise DegenerateFitError(f"nonpositive residual sum of squares ({rss:.3g})")
    return n_eff * math.log(rss / n_eff) + df * math.log(n_eff)


def eric_score(rss: float, df: int, n_eff: int, lam: float, nu: float = 1.0) -> float:
    """ERIC: N log(RSS/N) + 2 nu df log(N (RSS/N) / lambda)."""
    if n_eff <= 0:
        raise ValueError("n_eff must be positive")
    if lam <= 0:
        raise ValueError("eric requires lambda > 0")
    if rss <= 0:
        raise DegenerateFitError(f"nonpositive residual sum of squares ({rss:.3g})")
    sigma2 = rss / n_eff
    return n_eff * math.log(sigma2) + 2.0 * nu * df * math.log(n_eff * sigma2 / lam)


def rss_row(design: SampleDesign, j: int, beta: np.ndarray) -> float:
    """Residual sum of squares for one response row, from the cached moments."""
    n = design.n_eff
    quad = float(beta @ design.gram @ beta)
    lin = float(design.cross[:, j] @ beta)
    return float(design.y_sq[j] - 2.0 * n * lin + n * quad)


def profiled_rss_row(design: SampleDesign, j: int, beta: np.ndarray) -> float:
    """RSS of the least-squares refit on the support of ``beta``.

    Scoring the refit rather than the shrunken coefficients removes the
    penalty bias from the criterion (the likelihood is profiled over the
    active coefficients as well as the variance); the selected estimate
    itself stays penalized.  Falls back to the shrunken RSS when the
    support's Gram block is singular.
    """
    support = np.flatnonzero(np.abs(beta) > DF_TOL)
    if support.size == 0:
        return float(design.y_sq[j])
    g = design.gram[np.ix_(support, support)]
    c = design.cross[support, j]
    try:
        coef = np.linalg.solve(g, c)
    except np.linalg.LinAlgError:
        return rss_row(design, j, beta)
    return float(design.y_sq[j] - design.n_eff * float(c @ coef))


def profiled_rss_columns(design: SampleDesign, b_mat: np.ndarray) -> np.ndarray:
    """Column-wise least-squares refit of a coefficient block on its support."""
    out = np.zeros_like(b_mat)
    for j in range(b_mat.shape[1]):
        support = np.flatnonzero(np.abs(b_mat[:, j]) > DF_TOL)
        if support.size == 0:
            continue
        g = design.gram[np.ix_(support, support)]
        c = design.cross[support, j]
        try:
            out[support, j] = np.linalg.solve(g, c)
        except np.linalg.LinAlgError:
            out[:, j] = b_mat[:, j]
    return out


@dataclass
class Selection:
    lam: float
    beta: np.ndarray
    score: float
    df: int
    scores: list[tuple[float, float]]  # (lambda, score) for the scored points


def select(
    fit_path: Callable[[float, np.ndarray | None], np.ndarray],
    design: SampleDesign,
    j: int | None,
    rule: TuningRule,
    grid,
    rss_fn: Callable[[np.ndarray], float] | None = None,
    n_eff: int | None = None,
) -> Selection:
    """Fit along a descending grid with warm starts and return the argmin.

    Scoring uses the support-profiled RSS (see ``profiled_rss_row``) unless
    an explicit ``rss_fn`` is supplied.  Degrees of freedom are counted as
    coefficients with magnitude above 1e-10.  Score ties are broken toward
    the larger penalty (the sparser model).  Grid points whose fit or score
    fails are skipped; if every point fails the last error propagates.
    """
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if n_eff is None:
        n_eff = design.n_eff
    warm: np.ndarray | None = None
    best: Selection | None = None
    scored: list[tuple[float, float]] = []
    last_error: Exception | None = None
    for lam in grid:
        try:
            beta = fit_path(float(lam), warm)
        except SparseVarError as exc:
            last_error = exc
            continue
        warm = beta
        df = int(np.count_nonzero(np.abs(beta) > DF_TOL))
        rss = rss_fn(beta) if rss_fn is not None else profiled_rss_row(design, j, beta)
        try:
            if rule.kind == "bic":
                score = bic_score(rss, df, n_eff)
            else:
                score = eric_score(rss, df, n_eff, float(lam), rule.nu)
        except SparseVarError as exc:
            last_error = exc
            continue
        scored.append((float(lam), score))
        if best is None or score < best.score:
            best = Selection(
                lam=float(lam),
                beta=np.array(beta, copy=True),
                score=score,
                df=df,
                scores=scored,
            )
    if best is None:
        if last_error is not None:
            raise last_error
        raise DegenerateInputError("no grid point produced a scorable fit")
    best.scores = scored
    return best
