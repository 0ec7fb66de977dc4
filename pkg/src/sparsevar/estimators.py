"""The three penalized VAR estimators and the S/A/T modification pipeline.

Row-wise lasso and the vectorized (optionally residual-covariance weighted)
lasso run on cyclic coordinate descent over the cached second-moment
matrices, with warm starts along the penalty path and an active-set inner
loop.  The row-wise Dantzig selector is the split formulation
b = b+ - b- handed to the simplex solver.  ``fit`` wires everything
together: optional standardization (S), a second adaptively reweighted pass
(A), and componentwise thresholding of the final block (T), with the
selected penalty levels and any warnings recorded in the provenance.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import covariance as _cov
from ._kernels import cd_row, cd_vec
from .errors import (
    DegenerateInputError,
    InternalError,
    NonConvergenceError,
    NumericError,
)
from .lp import LpProblem, lp_solve
from .model import SampleDesign, TimeSeries, build_design, coeffs_from_b
from .thresholding import ThresholdRule, adaptive_rule, threshold_matrix
from .tuning import TuningRule, lambda_grid, profiled_rss_columns, select

__all__ = [
    "PenaltyWeights",
    "VarEstimate",
    "EstimatorConfig",
    "METHODS",
    "lasso_row",
    "lasso_vec",
    "dantzig_row",
    "standardize",
    "back_transform",
    "adaptive_weights",
    "fit",
]

METHODS = ("row_lasso", "vec_lasso", "row_dantzig")

_METHOD_LABELS = {
    "row_lasso": "Row-Lasso",
    "vec_lasso": "Vec-Lasso",
    "row_dantzig": "Row-Dantzig",
}


@dataclass(frozen=True)
class PenaltyWeights:
    """Per-coefficient nonnegative penalty multipliers (1 = plain l1)."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("penalty weights must be finite and >= 0")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def ones(cls, dp: int, d: int) -> "PenaltyWeights":
        return cls(np.ones((dp, d)))


@dataclass
class VarEstimate:
    """Estimated stacked coefficient block with selection provenance.

    ``b_hat`` is dp x d (lag blocks of transposed coefficient matrices);
    ``lambdas`` holds the selected penalty per response row (a single value
    for the vectorized estimator, broadcast to all rows).
    """

    b_hat: np.ndarray
    lambdas: np.ndarray
    p: int
    d: int
    method: str
    provenance: dict = field(default_factory=dict)

    def coeff_list(self) -> list[np.ndarray]:
        return coeffs_from_b(self.b_hat, self.p, self.d)


@dataclass(frozen=True)
class EstimatorConfig:
    """One estimator variant: method, modifications, and tuning choices."""

    method: str
    standardize: bool = False
    adaptive: bool = False
    threshold: bool = False
    tuning: TuningRule = TuningRule("bic")
    grid_size: int = 50
    grid_ratio: float | None = None
    threshold_rule: ThresholdRule = adaptive_rule(4.0)
    threshold_scale: float = 1.0
    reuse_lambda: bool = False
    tol: float = 1e-8
    max_iter: int = 100000
    center_weight_residuals: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def effective_grid_ratio(self) -> float:
        if self.grid_ratio is not None:
            return self.grid_ratio
        return 0.01 if self.method == "row_dantzig" else 0.001

    def label(self) -> str:
        mods = ""
        if self.threshold:
            mods += "T"
        if self.standardize:
            mods += "S"
        if self.adaptive:
            mods += "A"
        parts = [_METHOD_LABELS[self.method]]
        if mods:
            parts.append(mods)
        parts.append(self.tuning.label())
        return " ".join(parts)


# ---------------------------------------------------------------------------
# coordinate descent kernels


def _kkt_violation(grad, beta, lam_w) -> float:
    """Largest violation of the subgradient optimality conditions."""
    zero = beta == 0.0
    worst = 0.0
    if np.any(zero):
        worst = float(np.max(np.abs(grad[zero]) - lam_w[zero]))
    if np.any(~zero):
        act = ~zero
        resid = np.abs(grad[act] - lam_w[act] * np.sign(beta[act]))
        worst = max(worst, float(np.max(resid)))
    return worst


def lasso_row(
    design: SampleDesign,
    j: int,
    lam: float,
    weights: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 100000,
    warm: np.ndarray | None = None,
) -> np.ndarray:
    """l1-penalized least squares for one response row.

    Minimizes (2N)^-1 ||Y e_j - X b||^2 + lam sum_i w_i |b_i| by cyclic
    coordinate descent; on return the KKT residual is below ``tol``.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    dp = design.gram.shape[0]
    if weights is None:
        lam_w = np.full(dp, lam)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (dp,):
            raise ValueError(f"weights must have shape ({dp},)")
        lam_w = lam * w
    beta = np.zeros(dp) if warm is None else np.array(warm, dtype=float)
    status = cd_row(
        design.gram, np.ascontiguousarray(design.cross[:, j]), lam_w, beta,
        min(1e-7, tol), tol, max_iter,
    )
    if status < 0:
        raise NonConvergenceError(
            f"coordinate descent exceeded {max_iter} sweeps", last_iterate=beta.copy()
        )
    return beta


def lasso_vec(
    design: SampleDesign,
    w_inv_chol: np.ndarray | None,
    lam: float,
    weights: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 100000,
    warm: np.ndarray | None = None,
) -> np.ndarray:
    """Single-penalty vectorized lasso over the whole coefficient block.

    ``w_inv_chol`` is a factor L of the response-weighting precision
    (Omega = L L'); identity weighting when None.  The Kronecker structure
    of the weighted quadratic reduces the problem to coordinate descent on
    the moment matrices, so no transformed data matrix is ever formed.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    dp, d = design.cross.shape
    if w_inv_chol is None:
        omega = np.eye(d)
    else:
        fac = np.asarray(w_inv_chol, dtype=float)
        if fac.shape != (d, d) or not np.all(np.isfinite(fac)):
            raise ValueError("weighting factor must be a finite d x d matrix")
        omega = fac @ fac.T
    if weights is None:
        lam_w = np.full((dp, d), lam)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (dp, d):
            raise ValueError(f"weights must have shape ({dp}, {d})")
        lam_w = lam * w
    b_mat = np.zeros((dp, d)) if warm is None else np.array(warm, dtype=float)
    status = cd_vec(
        design.gram, np.ascontiguousarray(design.cross), np.ascontiguousarray(omega),
        np.ascontiguousarray(lam_w), b_mat, min(1e-7, tol), tol, max_iter,
    )
    if status < 0:
        raise NonConvergenceError(
            f"vectorized coordinate descent exceeded {max_iter} sweeps",
            last_iterate=b_mat.copy(),
        )
    return b_mat


def dantzig_row(
    design: SampleDesign,
    j: int,
    lam: float,
    weights: np.ndarray | None = None,
    tol: float = 1e-9,
    max_pivots: int = 50000,
) -> np.ndarray:
    """Row-wise Dantzig selector via the split linear program.

    Minimizes the (weighted) l1 norm subject to
    ||(X'X/N) b - X'Y e_j / N||_max <= lam.  The returned point is an
    optimal basic feasible solution of the LP.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    gram = design.gram
    b = design.cross[:, j]
    dp = gram.shape[0]
    if weights is None:
        w = np.ones(dp)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (dp,):
            raise ValueError(f"weights must have shape ({dp},)")
    block = np.vstack([np.hstack([gram, -gram]), np.hstack([-gram, gram])])
    h = np.concatenate([lam + b, lam - b])
    cost = np.concatenate([w, w])
    sol = lp_solve(LpProblem(c=cost, g_mat=block, h=h), tol=tol, max_pivots=max_pivots)
    beta = sol.x[:dp] - sol.x[dp:]
    violation = float(np.max(np.abs(gram @ beta - b)))
    if violation > lam + 1e-9:
        raise InternalError(
            f"Dantzig solution infeasible: residual {violation:.3g} > lam + 1e-9"
        )
    return beta


# ---------------------------------------------------------------------------
# modifications


def standardize(design: SampleDesign, series: TimeSeries):
    """Rescale the regression form by per-component sample standard deviations.

    Returns the transformed design together with the scale vector w; the
    estimate on the transformed scale maps back through
    ``back_transform(b_tilde, w, p)``.
    """
    sds = series.values.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sds > 0))
    if bad.size:
        raise DegenerateInputError(
            f"component {bad[0] + 1} has zero sample standard deviation"
        )
    tiled = np.tile(sds, design.p)
    transformed = SampleDesign(
        y_mat=design.y_mat / sds[None, :],
        x_mat=design.x_mat / tiled[None, :],
        n_eff=design.n_eff,
        p=design.p,
        d=design.d,
    )
    return transformed, sds


def back_transform(b_tilde: np.ndarray, scale: np.ndarray, p: int) -> np.ndarray:
    """Undo standardization: B = (I_p (x) W)^-1 B~ W."""
    tiled = np.tile(scale, p)
    return (b_tilde / tiled[:, None]) * scale[None, :]


def adaptive_weights(first_pass, n: int) -> PenaltyWeights:
    """Second-round penalty multipliers 1 / (|B1_ij| + 1/sqrt(n))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    b = first_pass.b_hat if hasattr(first_pass, "b_hat") else np.asarray(first_pass, dtype=float)
    return PenaltyWeights(1.0 / (np.abs(b) + 1.0 / np.sqrt(n)))


# ---------------------------------------------------------------------------
# pipeline


def _weighting_factor(design: SampleDesign, config: EstimatorConfig, seed: int, notes: list):
    """Residual-precision factor for the vectorized estimator.

    A plain row-wise lasso supplies residuals; their thresholded covariance
    is inverted through its Cholesky factor.  If the thresholded matrix is
    not positive definite the diagonal of the sample covariance is used
    instead.
    """
    row_cfg = replace(config, method="row_lasso", adaptive=False, threshold=False,
                      standardize=False)
    first = _fit_rows(design, row_cfg, weights=None)
    resid = _cov.residuals_from_design(design, first[0], center=config.center_weight_residuals)
    sigma_sample = _cov.sample_cov(resid)
    spec = _cov.CovCvSpec(seed=seed)
    try:
        sigma_thr = _cov.thresholded_cov(resid, config.threshold_rule, spec)
        chol = np.linalg.cholesky(sigma_thr)
        factor = np.linalg.solve(chol.T, np.eye(design.d))  # upper-tri solve
        notes.append("weighting=thresholded-residual-precision")
        return factor
    except (np.linalg.LinAlgError, NumericError):
        notes.append("weighting=diagonal-residual-variances (thresholded covariance not PD)")
        return np.diag(1.0 / np.sqrt(np.diag(sigma_sample)))


def _fit_rows(design: SampleDesign, config: EstimatorConfig, weights: np.ndarray | None):
    """First- or second-pass row-by-row fit with per-row tuning.

    Returns (b_hat, lambdas, row_events).  A failing row keeps the last
    iterate carried by the error (or zeros) and is recorded instead of
    aborting the remaining rows.
    """
    dp, d = design.cross.shape
    b_hat = np.zeros((dp, d))
    lambdas = np.zeros(d)
    events: list[str] = []
    kind = "dantzig" if config.method == "row_dantzig" else "lasso"
    for j in range(d):
        w_col = None if weights is None else weights[:, j]
        grid = lambda_grid(
            design, j, size=config.grid_size, ratio=config.effective_grid_ratio,
            weights=w_col, kind=kind,
        )
        if config.method == "row_dantzig":
            def path(lam, warm, _j=j, _w=w_col):
                return dantzig_row(design, _j, lam, weights=_w)
        else:
            def path(lam, warm, _j=j, _w=w_col):
                return lasso_row(design, _j, lam, weights=_w, tol=config.tol,
                                 max_iter=config.max_iter, warm=warm)
        try:
            sel = select(path, design, j, config.tuning, grid)
            b_hat[:, j] = sel.beta
            lambdas[j] = sel.lam
        except NonConvergenceError as exc:
            if exc.last_iterate is not None:
                b_hat[:, j] = exc.last_iterate
            lambdas[j] = np.nan
            events.append(f"row {j + 1}: {exc}")
        except NumericError as exc:
            lambdas[j] = np.nan
            events.append(f"row {j + 1}: {exc}")
    return b_hat, lambdas, events


def _fit_rows_at(design: SampleDesign, config: EstimatorConfig,
                 weights: np.ndarray | None, lambdas: np.ndarray):
    """Row-by-row fit at fixed penalty levels (lambda reuse path)."""
    dp, d = design.cross.shape
    b_hat = np.zeros((dp, d))
    events: list[str] = []
    for j in range(d):
        w_col = None if weights is None else weights[:, j]
        try:
            if config.method == "row_dantzig":
                b_hat[:, j] = dantzig_row(design, j, float(lambdas[j]), weights=w_col)
            else:
                b_hat[:, j] = lasso_row(design, j, float(lambdas[j]), weights=w_col,
                                        tol=config.tol, max_iter=config.max_iter)
        except NumericError as exc:
            events.append(f"row {j + 1}: {exc}")
    return b_hat, events


def _vec_grid(design: SampleDesign, omega_factor: np.ndarray | None,
              weights: np.ndarray | None, config: EstimatorConfig) -> np.ndarray:
    """Penalty grid for the vectorized problem, from the weighted moments."""
    if omega_factor is None:
        kmat = np.abs(design.cross)
    else:
        omega = omega_factor @ omega_factor.T
        kmat = np.abs(design.cross @ omega)
    if weights is not None:
        kmat = np.where(weights > 0, kmat / np.where(weights > 0, weights, 1.0), 0.0)
    lam_max = float(kmat.max())
    if lam_max <= 0:
        raise DegenerateInputError("design and response are uncorrelated; empty grid")
    return np.geomspace(lam_max, lam_max * config.effective_grid_ratio, config.grid_size)


def _fit_vec(design: SampleDesign, config: EstimatorConfig, factor: np.ndarray | None,
             weights: np.ndarray | None, fixed_lambda: float | None = None):
    omega = np.eye(design.d) if factor is None else factor @ factor.T

    def weighted_rss(b_mat):
        # support-profiled, then ||(Y - X B) L||_F^2 via moments:
        # tr(Omega (Y-XB)'(Y-XB))
        refit = profiled_rss_columns(design, b_mat)
        quad = float(np.sum((design.gram @ refit) * (refit @ omega)))
        lin = float(np.sum(design.cross * (refit @ omega)))
        const = float(np.sum((design.y_mat @ omega) * design.y_mat))
        return const - 2.0 * design.n_eff * lin + design.n_eff * quad

    def path(lam, warm):
        return lasso_vec(design, factor, lam, weights=weights, tol=config.tol,
                         max_iter=config.max_iter, warm=warm)

    if fixed_lambda is not None:
        b = path(fixed_lambda, None)
        return b, fixed_lambda, []
    grid = _vec_grid(design, factor, weights, config)
    sel = select(path, design, None, config.tuning, grid,
                 rss_fn=weighted_rss, n_eff=design.n_eff * design.d)
    return sel.beta, sel.lam, []


def fit(config: EstimatorConfig, series: TimeSeries, p: int, seed: int = 0) -> VarEstimate:
    """Run one configured estimator on a series.

    Pipeline: build the regression form; standardize if S; first pass with
    tuned penalties; if A, recompute adaptive weights and re-run (re-tuning
    the penalty unless ``reuse_lambda``); if T, threshold the block at each
    row's selected level before undoing the standardization.
    """
    design = build_design(series, p)
    notes: list[str] = []
    warnings: list[str] = []
    events: list[str] = []
    scale = None
    des = design
    if config.standardize:
        des, scale = standardize(design, series)

    factor = None
    if config.method == "vec_lasso":
        factor = _weighting_factor(des, config, seed, notes)
        b_hat, lam, _ = _fit_vec(des, config, factor, weights=None)
        lambdas = np.full(design.d, lam)
    else:
        b_hat, lambdas, ev = _fit_rows(des, config, weights=None)
        events.extend(ev)

    first_lambdas = lambdas.copy()
    if config.adaptive:
        weights = adaptive_weights(b_hat, series.n).w
        if config.method == "vec_lasso":
            fixed = float(first_lambdas[0]) if config.reuse_lambda else None
            b_hat, lam, _ = _fit_vec(des, config, factor, weights=weights,
                                     fixed_lambda=fixed)
            lambdas = np.full(design.d, lam)
        elif config.reuse_lambda:
            b_hat, ev = _fit_rows_at(des, config, weights, first_lambdas)
            lambdas = first_lambdas
            events.extend(ev)
        else:
            b_hat, lambdas, ev = _fit_rows(des, config, weights=weights)
            events.extend(ev)

    if config.threshold:
        if not config.threshold_rule.conforming:
            warnings.append("hard thresholding does not satisfy the shrinkage conditions")
        for j in range(design.d):
            lam_j = lambdas[j]
            if not np.isfinite(lam_j):
                continue
            b_hat[:, j] = threshold_matrix(
                config.threshold_rule, config.threshold_scale * lam_j, b_hat[:, j]
            )

    if scale is not None:
        b_hat = back_transform(b_hat, scale, p)

    provenance = {
        "method": config.method,
        "label": config.label(),
        "modifications": "".join(
            m for m, on in (("T", config.threshold), ("S", config.standardize),
                            ("A", config.adaptive)) if on
        ),
        "tuning": config.tuning.label(),
        "ic_note": "BIC = N log(RSS/N) + df log N; "
                   "ERIC = N log(RSS/N) + 2 nu df log(N (RSS/N)/lambda) -- "
                   "package conventions, selection rules are named upstream "
                   "without formulas",
        "first_pass_lambdas": first_lambdas.tolist(),
        "lambdas": np.asarray(lambdas, dtype=float).tolist(),
        "lambda_reused": bool(config.reuse_lambda and config.adaptive),
        "threshold_rule": config.threshold_rule.label() if config.threshold else None,
        "threshold_scale": config.threshold_scale if config.threshold else None,
        "notes": notes,
        "warnings": warnings,
        "row_events": events,
    }
    return VarEstimate(
        b_hat=b_hat,
        lambdas=np.asarray(lambdas, dtype=float),
        p=p,
        d=design.d,
        method=config.method,
        provenance=provenance,
    )
