"""Matrix norms, the four benchmark performance criteria, and deterministic
error-bound checks for the second-order estimators.

Criteria: (a) companion-form coefficient error, (gamma) relative stacked
lag-zero covariance error, (spec) relative integrated spectral error over
Fourier frequencies, (forecast) scaled h-step mean squared forecast error.
Unstable estimates flag the second-order criteria as non-finite instead of
aborting a run; the Monte-Carlo layer aggregates over finite values and
reports the failure count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import IterationLimitError, SparseVarError
from .model import (
    TimeSeries,
    VarModel,
    companion,
    forecast,
    inverse_spectral_density,
    simulate,
    spectral_density,
    spectral_radius,
    stationary_cov_stacked,
)

__all__ = [
    "matrix_norm",
    "crit_param_error",
    "crit_gamma_error",
    "crit_spectral_error",
    "crit_forecast_mse",
    "ForecastMseResult",
    "fourier_frequencies",
    "theorem3_bound_check",
    "theorem4_bound_check",
    "replication_seed",
]

_NORM_KINDS = ("one", "inf", "max", "two")


def matrix_norm(m, kind: str = "inf") -> float:
    """Matrix norm: 'one' (column sums), 'inf' (row sums), 'max' (largest
    magnitude) computed exactly; 'two' by power iteration on m'm."""
    a = np.asarray(m, dtype=float)
    if kind == "one":
        return float(np.abs(a).sum(axis=0).max()) if a.size else 0.0
    if kind == "inf":
        return float(np.abs(a).sum(axis=1).max()) if a.size else 0.0
    if kind == "max":
        return float(np.abs(a).max()) if a.size else 0.0
    if kind == "two":
        return _spectral_norm(a)
    raise ValueError(f"unknown norm kind {kind!r}")


def _spectral_norm(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> float:
    if a.size == 0:
        return 0.0
    s = a.T @ a
    k = s.shape[0]
    v = np.arange(1.0, k + 1.0)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(max_iter):
        w = s @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam = float(v @ (s @ v))
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            break
        lam_prev = lam
    return math.sqrt(max(lam, 0.0))


def _estimate_coeffs(estimate) -> list[np.ndarray]:
    if hasattr(estimate, "coeff_list"):
        return estimate.coeff_list()
    return [np.asarray(a, dtype=float) for a in estimate]


def _companion_of(coeffs: Sequence[np.ndarray]) -> np.ndarray:
    d = coeffs[0].shape[0]
    sigma = np.eye(d)
    return companion(VarModel(coeffs=tuple(coeffs), sigma_eps=sigma)).a_stack


def crit_param_error(true_model: VarModel, estimate) -> float:
    """Row-sum norm of the companion-form coefficient error."""
    est = _estimate_coeffs(estimate)
    if len(est) != true_model.p or est[0].shape != (true_model.d, true_model.d):
        raise ValueError("estimate dimensions do not match the reference model")
    diff = _companion_of(est) - companion(true_model).a_stack
    return matrix_norm(diff, "inf")


def _estimated_model(estimate, est_sigma: np.ndarray, d: int) -> VarModel:
    coeffs = _estimate_coeffs(estimate)
    sigma = np.asarray(est_sigma, dtype=float)
    sigma = 0.5 * (sigma + sigma.T)
    return VarModel(coeffs=tuple(coeffs), sigma_eps=sigma)


def crit_gamma_error(
    true_model: VarModel, estimate, est_sigma: np.ndarray, norm_kind: str = "inf"
) -> float:
    """Relative error of the stacked lag-zero covariance.

    Returns inf when the estimated companion is unstable (no stability
    correction is applied); callers treat non-finite values as flagged
    failures rather than errors.
    """
    gamma_true = stationary_cov_stacked(true_model)
    try:
        est_model = _estimated_model(estimate, est_sigma, true_model.d)
    except ValueError:
        return float("inf")
    if spectral_radius(_companion_of(est_model.coeffs)) >= 1.0:
        return float("inf")
    gamma_est = stationary_cov_stacked(est_model)
    return matrix_norm(gamma_est - gamma_true, norm_kind) / matrix_norm(gamma_true, norm_kind)


def fourier_frequencies(n_freq: int) -> np.ndarray:
    """The n_freq equispaced frequencies 2 pi k / n_freq on [-pi, pi)."""
    k = np.arange(-(n_freq // 2), (n_freq + 1) // 2)
    return 2.0 * math.pi * k / n_freq


def crit_spectral_error(
    true_model: VarModel,
    estimate,
    est_sigma: np.ndarray,
    norm_kind: str = "inf",
    n_freq: int = 512,
    true_density: Sequence[np.ndarray] | None = None,
) -> float:
    """Relative integrated spectral error over the Fourier frequencies.

    ``true_density`` can carry precomputed reference densities on the same
    grid so repeated scoring against one model does not recompute them.
    """
    omegas = fourier_frequencies(n_freq)
    try:
        est_model = _estimated_model(estimate, est_sigma, true_model.d)
    except ValueError:
        return float("inf")
    if spectral_radius(_companion_of(est_model.coeffs)) >= 1.0:
        return float("inf")
    num = 0.0
    den = 0.0
    for i, om in enumerate(omegas):
        f_true = true_density[i] if true_density is not None else spectral_density(true_model, om)
        f_est = spectral_density(est_model, om)
        diff = f_est - f_true
        num += _complex_norm(diff, norm_kind)
        den += _complex_norm(f_true, norm_kind)
    return num / den


def _complex_norm(m: np.ndarray, kind: str) -> float:
    a = np.abs(m)
    if kind == "one":
        return float(a.sum(axis=0).max())
    if kind == "inf":
        return float(a.sum(axis=1).max())
    if kind == "max":
        return float(a.max())
    if kind == "two":
        return float(np.linalg.norm(m, 2))
    raise ValueError(f"unknown norm kind {kind!r}")


def replication_seed(master_seed: int, *key: int) -> int:
    """Stable per-replication seed derived from a master seed and an index
    path; independent of execution order."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ForecastMseResult:
    per_component: np.ndarray
    average: float
    n_used: int
    n_failed: int


def crit_forecast_mse(
    true_model: VarModel,
    fit_procedure: Callable[[TimeSeries], object],
    n: int,
    h: int,
    replications: int,
    seed: int,
    burn_in: int = 500,
) -> ForecastMseResult:
    """Scaled h-step forecast MSE over seeded Monte-Carlo replications.

    Each replication simulates n + h observations, fits on the first n,
    forecasts h steps and records the squared error against the realized
    path, scaled by the true innovation variances.  Failing replications
    are excluded and counted.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if h < 1:
        raise ValueError("h must be >= 1")
    d = true_model.d
    sigma2 = np.diag(true_model.sigma_eps)
    total = np.zeros(d)
    used = 0
    failed = 0
    for r in range(replications):
        rep_seed = replication_seed(seed, r)
        series = simulate(true_model, n + h, burn_in=burn_in, seed=rep_seed)
        train = TimeSeries(values=series.values[:n])
        try:
            est = fit_procedure(train)
            coeffs = _estimate_coeffs(est)
            x_hat = forecast(coeffs, train, h)
        except (SparseVarError, np.linalg.LinAlgError, ValueError):
            failed += 1
            continue
        err = x_hat - series.values[n + h - 1]
        total += err**2 / sigma2
        used += 1
    if used == 0:
        return ForecastMseResult(np.full(d, np.nan), float("nan"), 0, failed)
    per = total / used
    return ForecastMseResult(per, float(per.mean()), used, failed)


# ---------------------------------------------------------------------------
# deterministic bound checks for the second-order estimators


def _norm_power_series(mat: np.ndarray, kind: str, tol: float, max_terms: int) -> np.ndarray:
    """Norms of successive powers ||M^j|| until they fall below ``tol``."""
    rho = spectral_radius(mat)
    if rho >= 1.0:
        raise IterationLimitError(f"power series diverges: spectral radius {rho:.4g} >= 1")
    norms = [1.0]  # ||M^0||
    power = np.eye(mat.shape[0])
    for _ in range(max_terms):
        power = power @ mat
        value = matrix_norm(power, kind)
        norms.append(value)
        if value < tol:
            return np.array(norms)
    raise IterationLimitError(
        f"norm power series did not fall below {tol:g} within {max_terms} terms"
    )


def theorem3_bound_check(
    true_model: VarModel,
    estimate,
    est_sigma: np.ndarray,
    norm_kind: str = "inf",
    h: int = 0,
    series_tol: float = 1e-12,
    max_terms: int = 20000,
):
    """Achieved lag-h autocovariance error and its deterministic bound.

    The bound follows the telescoped power-series expansion of the stacked
    covariance difference; every series constant is summed numerically until
    terms drop below ``series_tol``, so the inequality achieved <= bound is
    exact (up to rounding) whenever both models are stable.

    Returns (lhs, rhs).
    """
    d = true_model.d
    est_model = _estimated_model(estimate, est_sigma, d)
    a_true = companion(true_model).a_stack
    a_est = _companion_of(est_model.coeffs)
    gamma_true = stationary_cov_stacked(true_model)
    gamma_est = stationary_cov_stacked(est_model)
    if h == 0:
        lhs = matrix_norm((gamma_est - gamma_true)[:d, :d], norm_kind)
    else:
        pow_true = np.linalg.matrix_power(a_true, h)
        pow_est = np.linalg.matrix_power(a_est, h)
        lhs = matrix_norm(
            (pow_est @ gamma_est - pow_true @ gamma_true)[:d, :d], norm_kind
        )

    nt = _norm_power_series(a_true, norm_kind, series_tol, max_terms)
    ne = _norm_power_series(a_est, norm_kind, series_tol, max_terms)
    ntt = _norm_power_series(a_true.T, norm_kind, series_tol, max_terms)
    net = _norm_power_series(a_est.T, norm_kind, series_tol, max_terms)
    n_terms = max(nt.size, ne.size, ntt.size, net.size, h + 1) + 1
    nt = _pad(nt, n_terms)
    ne = _pad(ne, n_terms)
    ntt = _pad(ntt, n_terms)
    net = _pad(net, n_terms)

    da = matrix_norm(a_est - a_true, norm_kind)
    dat = matrix_norm(a_est.T - a_true.T, norm_kind)
    dsig = matrix_norm(np.asarray(est_sigma, float) - true_model.sigma_eps, norm_kind)
    sig = matrix_norm(true_model.sigma_eps, norm_kind)
    sig_est = matrix_norm(np.asarray(est_sigma, float), norm_kind)

    # sum_{s>=1} (sum_{j<s} ||Ae^j|| ||A^(s-1-j)||) ||(A^s)'|| and the
    # mirrored version for the transposed factors
    conv_true = np.array([float(ne[:s] @ nt[s - 1 :: -1]) for s in range(1, n_terms)])
    d1 = float(conv_true @ ntt[1:n_terms])
    d2 = float(ne[:n_terms] @ ntt[:n_terms])
    conv_t = np.array([float(net[:s] @ ntt[s - 1 :: -1]) for s in range(1, n_terms)])
    d3 = float(ne[1:n_terms] @ conv_t)

    bound0 = da * sig * d1 + dsig * d2 + dat * sig_est * d3
    if h == 0:
        rhs = bound0
    else:
        pow_est_norm = matrix_norm(np.linalg.matrix_power(a_est, h), norm_kind)
        shift = float(ne[:h] @ nt[h - 1 :: -1])
        rhs = pow_est_norm * bound0 + shift * da * matrix_norm(gamma_true, norm_kind)
    return lhs, rhs


def _pad(arr: np.ndarray, size: int) -> np.ndarray:
    if arr.size >= size:
        return arr
    return np.concatenate([arr, np.zeros(size - arr.size)])


def theorem4_bound_check(
    true_coeffs: Sequence[np.ndarray],
    true_sigma_inv: np.ndarray,
    est_coeffs: Sequence[np.ndarray],
    est_sigma_inv: np.ndarray,
    norm_kind: str = "inf",
    omegas: Sequence[float] | None = None,
):
    """Largest inverse-spectral-density error on a frequency grid and its
    deterministic bound from the class constants.

    The bound uses the realized class constants of the true model: M bounds
    the summed 1- and inf-norms of the lag matrices, M_inv the norms of the
    true precision matrix, and the t terms the achieved coefficient and
    precision errors (each taken as the larger of the 1- and inf-norm
    versions, which is what the sub-multiplicative expansion needs).  The
    transfer polynomial at a unit-circle point has norm at most 1 + M.

    Returns (lhs, rhs).
    """
    if omegas is None:
        omegas = fourier_frequencies(16)
    true_coeffs = [np.asarray(a, float) for a in true_coeffs]
    est_coeffs = [np.asarray(a, float) for a in est_coeffs]
    true_sigma_inv = np.asarray(true_sigma_inv, float)
    est_sigma_inv = np.asarray(est_sigma_inv, float)

    lhs = 0.0
    for om in omegas:
        f_inv_true = inverse_spectral_density(true_coeffs, true_sigma_inv, om)
        f_inv_est = inverse_spectral_density(est_coeffs, est_sigma_inv, om)
        lhs = max(lhs, _complex_norm(f_inv_est - f_inv_true, norm_kind))

    m_const = max(
        sum(matrix_norm(a, "one") for a in true_coeffs),
        sum(matrix_norm(a, "inf") for a in true_coeffs),
    )
    m_inv = max(matrix_norm(true_sigma_inv, "one"), matrix_norm(true_sigma_inv, "inf"))
    t1 = max(
        sum(matrix_norm(e - a, "one") for e, a in zip(est_coeffs, true_coeffs)),
        sum(matrix_norm(e - a, "inf") for e, a in zip(est_coeffs, true_coeffs)),
    )
    dsig = est_sigma_inv - true_sigma_inv
    t2 = max(matrix_norm(dsig, "one"), matrix_norm(dsig, "inf"))
    poly = 1.0 + m_const
    rhs = 2.0 * math.pi * (
        2.0 * poly * m_inv * t1
        + poly**2 * t2
        + 2.0 * poly * t1 * t2
        + t1**2 * m_inv
        + t1**2 * t2
    )
    return lhs, rhs
