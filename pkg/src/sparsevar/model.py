"""VAR(p) model containers and exact second-order machinery.

Holds the model/series/design value types, companion-form algebra, the
stationary covariance solver (doubling iteration for the discrete Lyapunov
equation), spectral density evaluation, seeded simulation, design-matrix
construction for the regression form, multi-step forecasting, and the
approximate-sparsity class predicates.

Everything here is pure: values are immutable after construction and all
randomness enters through explicit seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    FactorizationError,
    InsufficientDataError,
    IterationLimitError,
    SingularityError,
    StabilityError,
)

__all__ = [
    "VarModel",
    "CompanionForm",
    "TimeSeries",
    "SampleDesign",
    "SparsityClass",
    "MembershipResult",
    "companion",
    "spectral_radius",
    "stationary_cov_stacked",
    "autocov_stacked",
    "autocov",
    "spectral_density",
    "inverse_spectral_density",
    "transfer_matrix",
    "simulate",
    "build_design",
    "forecast",
    "coeffs_from_b",
    "b_from_coeffs",
    "class_membership",
    "class_budgets",
]


def _as_square(m, name: str) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class VarModel:
    """A VAR(p) model: coefficient matrices and innovation covariance.

    ``coeffs`` is the ordered tuple of p dense d x d lag matrices and
    ``sigma_eps`` the d x d innovation covariance, required symmetric to
    1e-12 with strictly positive diagonal.
    """

    coeffs: tuple[np.ndarray, ...]
    sigma_eps: np.ndarray

    def __post_init__(self):
        coeffs = tuple(_as_square(a, f"coeffs[{k}]") for k, a in enumerate(self.coeffs))
        if not coeffs:
            raise ValueError("at least one coefficient matrix is required")
        d = coeffs[0].shape[0]
        for k, a in enumerate(coeffs):
            if a.shape != (d, d):
                raise ValueError(f"coeffs[{k}] has shape {a.shape}, expected ({d}, {d})")
        sigma = _as_square(self.sigma_eps, "sigma_eps")
        if sigma.shape != (d, d):
            raise ValueError(f"sigma_eps has shape {sigma.shape}, expected ({d}, {d})")
        if np.max(np.abs(sigma - sigma.T)) > 1e-12:
            raise ValueError("sigma_eps is not symmetric within 1e-12")
        if np.any(np.diag(sigma) <= 0):
            raise ValueError("sigma_eps must have strictly positive diagonal")
        for a in coeffs:
            a.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "sigma_eps", sigma)

    @property
    def p(self) -> int:
        return len(self.coeffs)

    @property
    def d(self) -> int:
        return self.coeffs[0].shape[0]


@dataclass(frozen=True)
class CompanionForm:
    """Stacked VAR(1) form: dp x dp transition matrix and dp x d embedding."""

    a_stack: np.ndarray
    embed: np.ndarray
    dp: int


@dataclass(frozen=True)
class TimeSeries:
    """An observed d-variate series; row t holds the observation at time t."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("values must be an (n, d) matrix with n >= 1")
        if not np.all(np.isfinite(v)):
            raise ValueError("series contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass
class SampleDesign:
    """Regression form of an observed series.

    ``y_mat`` stacks the responses (X_n, ..., X_{p+1}) top-down, ``x_mat``
    the matching lag vectors (W_{n-1}, ..., W_p); ``n_eff`` = n - p rows.
    Second-moment matrices are cached because every row fit and every grid
    point reuses them.
    """

    y_mat: np.ndarray
    x_mat: np.ndarray
    n_eff: int
    p: int
    d: int

    @cached_property
    def gram(self) -> np.ndarray:
        """X'X / (n - p), shared by all rows and penalty levels."""
        g = self.x_mat.T @ self.x_mat / self.n_eff
        g.setflags(write=False)
        return g

    @cached_property
    def cross(self) -> np.ndarray:
        """X'Y / (n - p)."""
        c = self.x_mat.T @ self.y_mat / self.n_eff
        c.setflags(write=False)
        return c

    @cached_property
    def y_sq(self) -> np.ndarray:
        """Per-response squared norms of the response columns."""
        s = np.sum(self.y_mat**2, axis=0)
        s.setflags(write=False)
        return s


@dataclass(frozen=True)
class SparsityClass:
    """Row/column approximate-sparsity class for a stack of p lag matrices.

    ``variant`` 1 bounds per-lag column budgets and per-lag 1-norms; variant
    2 sums both across lags (variant 2 is a subset of variant 1).  ``q`` in
    [0, 1) is the power in the budget sums, ``s`` the budget, ``m_bound``
    the 1/inf-norm bound.
    """

    variant: int
    q: float
    s: float
    m_bound: float
    p: int

    def __post_init__(self):
        if self.variant not in (1, 2):
            raise ValueError("variant must be 1 or 2")
        if not 0 <= self.q < 1:
            raise ValueError("q must lie in [0, 1)")
        if self.s <= 0 or self.m_bound <= 0:
            raise ValueError("s and m_bound must be positive")
        if self.p < 1:
            raise ValueError("p must be a positive integer")


@dataclass(frozen=True)
class MembershipResult:
    ok: bool
    witness: str | None

    def __bool__(self) -> bool:
        return self.ok


def companion(model: VarModel) -> CompanionForm:
    """Build the stacked VAR(1) form of a VAR(p) model."""
    d, p = model.d, model.p
    dp = d * p
    a = np.zeros((dp, dp))
    a[:d, :] = np.hstack(model.coeffs)
    if p > 1:
        idx = np.arange(d * (p - 1))
        a[d + idx, idx] = 1.0
    embed = np.zeros((dp, d))
    embed[:d, :] = np.eye(d)
    return CompanionForm(a_stack=a, embed=embed, dp=dp)


def spectral_radius(m, tol: float = 1e-10, max_iter: int = 100) -> float:
    """Largest absolute eigenvalue of a square real matrix.

    Computed eigensolver-free by Gelfand's formula with repeated squaring:
    ||A^(2^k)||_1^(1/2^k) decreases to rho(A) and each squaring halves the
    remaining error, so convergence to ``tol`` takes a few dozen matrix
    products.  Deterministic given the input; handles complex dominant
    pairs, where a plain power iteration would oscillate.
    """
    a = _as_square(m, "m")
    norm = np.abs(a).sum(axis=0).max()  # operator 1-norm, dominates rho
    if norm == 0.0:
        return 0.0
    c = a / norm
    log_scale = math.log(norm)
    estimate = math.exp(log_scale)
    for k in range(1, max_iter + 1):
        c = c @ c
        n_k = np.abs(c).sum(axis=0).max()
        if n_k == 0.0:
            return 0.0  # nilpotent
        c /= n_k
        log_scale += math.log(n_k) / 2.0**k
        new_estimate = math.exp(log_scale)
        if abs(new_estimate - estimate) <= 0.5 * tol * max(1.0, new_estimate):
            return new_estimate
        estimate = new_estimate
    raise IterationLimitError(
        f"spectral radius did not stabilize within {max_iter} squarings",
        last_iterate=estimate,
    )


def _sigma_u(model: VarModel) -> np.ndarray:
    dp = model.d * model.p
    s = np.zeros((dp, dp))
    s[: model.d, : model.d] = model.sigma_eps
    return s


def stationary_cov_stacked(
    model: VarModel, tol: float = 1e-10, max_iter: int = 200
) -> np.ndarray:
    """Lag-zero covariance of the stacked VAR(1) state.

    Solves G = A G A' + S_U by the doubling iteration
    G_{k+1} = G_k + M_k G_k M_k', M_{k+1} = M_k^2 with M_0 = A, which sums
    the power series in 2^k terms per round.  Stops once the Lyapunov
    residual ||G - A G A' - S_U||_max falls below ``tol``.
    """
    comp = companion(model)
    rho = spectral_radius(comp.a_stack)
    if rho >= 1.0:
        raise StabilityError(f"companion spectral radius {rho:.6g} >= 1")
    a = comp.a_stack
    s_u = _sigma_u(model)
    gamma = s_u.copy()
    m = a.copy()
    for _ in range(max_iter):
        gamma = gamma + m @ gamma @ m.T
        m = m @ m
        residual = gamma - a @ gamma @ a.T - s_u
        if np.max(np.abs(residual)) <= tol:
            gamma = 0.5 * (gamma + gamma.T)
            return gamma
    raise IterationLimitError(
        f"Lyapunov doubling did not reach residual {tol:g} in {max_iter} rounds",
        last_iterate=gamma,
    )


def autocov_stacked(model: VarModel, h: int, tol: float = 1e-10) -> np.ndarray:
    """Stacked autocovariance at lag h: A^h G for h >= 0, transpose below."""
    if h < 0:
        return autocov_stacked(model, -h, tol).T
    gamma0 = stationary_cov_stacked(model, tol=tol)
    if h == 0:
        return gamma0
    a_pow = np.linalg.matrix_power(companion(model).a_stack, h)
    return a_pow @ gamma0


def autocov(model: VarModel, h: int, tol: float = 1e-10) -> np.ndarray:
    """Autocovariance matrix of the observed process at lag h."""
    d = model.d
    return autocov_stacked(model, h, tol)[:d, :d]


def transfer_matrix(coeffs: Sequence[np.ndarray], z: complex) -> np.ndarray:
    """Evaluate I - sum_s A_s z^s at a complex argument."""
    coeffs = [np.asarray(a, dtype=float) for a in coeffs]
    d = coeffs[0].shape[0]
    acc = np.eye(d, dtype=complex)
    zs = 1.0 + 0.0j
    for a in coeffs:
        zs *= z
        acc -= a * zs
    return acc


def spectral_density(model: VarModel, omega: float) -> np.ndarray:
    """Spectral density matrix of the VAR process at one frequency.

    Evaluated through two linear solves of the lag polynomial at
    exp(-i omega) and exp(i omega) rather than explicit inversion.
    """
    a_neg = transfer_matrix(model.coeffs, np.exp(-1j * omega))
    a_pos = transfer_matrix(model.coeffs, np.exp(1j * omega))
    try:
        left = np.linalg.solve(a_neg, model.sigma_eps.astype(complex))
        f = np.linalg.solve(a_pos, left.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularityError(
            f"lag polynomial singular at frequency {omega:.6g}: {exc}"
        ) from exc
    return f / (2.0 * math.pi)


def inverse_spectral_density(
    coeffs: Sequence[np.ndarray], sigma_inv: np.ndarray, omega: float
) -> np.ndarray:
    """Inverse spectral density evaluated from supplied coefficient and
    precision matrices; no matrix inversion is performed, so the inputs may
    be estimates."""
    sigma_inv = np.asarray(sigma_inv, dtype=float)
    if np.max(np.abs(sigma_inv - sigma_inv.T)) > 1e-8:
        raise ValueError("sigma_inv must be symmetric")
    d = sigma_inv.shape[0]
    coeffs = [np.asarray(a, dtype=float) for a in coeffs]
    if any(a.shape != (d, d) for a in coeffs):
        raise ValueError("coefficient matrices must match sigma_inv dimension")
    a_pos = transfer_matrix(coeffs, np.exp(1j * omega))
    a_neg = transfer_matrix(coeffs, np.exp(-1j * omega))
    return 2.0 * math.pi * (a_pos.T @ sigma_inv @ a_neg)


def simulate(
    model: VarModel,
    n: int,
    burn_in: int = 500,
    seed: int = 0,
    return_innovations: bool = False,
):
    """Simulate a Gaussian VAR(p) path of length n after a burn-in.

    Starts from a zero state, draws the full innovation block from one
    seeded generator pass through a Cholesky factor of the innovation
    covariance, and iterates the stacked VAR(1) recursion; identical
    arguments give bit-identical output.  With ``return_innovations`` the
    innovations aligned with the returned rows are attached.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    rho = spectral_radius(companion(model).a_stack)
    if rho >= 1.0:
        raise StabilityError(f"cannot simulate: companion spectral radius {rho:.6g} >= 1")
    try:
        chol = np.linalg.cholesky(model.sigma_eps)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"sigma_eps is not positive definite: {exc}") from exc
    d, p = model.d, model.p
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((burn_in + n, d)) @ chol.T
    comp = companion(model)
    a = comp.a_stack
    state = np.zeros(d * p)
    out = np.empty((burn_in + n, d))
    for t in range(burn_in + n):
        state = a @ state
        state[:d] += eps[t]
        out[t] = state[:d]
    series = TimeSeries(values=out[burn_in:])
    if return_innovations:
        return series, eps[burn_in:]
    return series


def build_design(series: TimeSeries, p: int) -> SampleDesign:
    """Arrange a series into the regression form (responses, lag matrix)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    n, d = series.n, series.d
    if n <= p:
        raise InsufficientDataError(f"need n > p, got n={n}, p={p}")
    v = series.values
    n_eff = n - p
    # responses X_n, ..., X_{p+1} top-down; row k of the lag matrix holds
    # (X_{n-1-k}', ..., X_{n-p-k}')
    y = v[p:][::-1].copy()
    x = np.empty((n_eff, d * p))
    for lag in range(1, p + 1):
        x[:, (lag - 1) * d : lag * d] = v[p - lag : n - lag][::-1]
    return SampleDesign(y_mat=y, x_mat=x, n_eff=n_eff, p=p, d=d)


def coeffs_from_b(b_hat: np.ndarray, p: int, d: int) -> list[np.ndarray]:
    """Split a stacked dp x d coefficient block into the p lag matrices."""
    b_hat = np.asarray(b_hat, dtype=float)
    if b_hat.shape != (d * p, d):
        raise ValueError(f"expected shape ({d * p}, {d}), got {b_hat.shape}")
    return [b_hat[k * d : (k + 1) * d, :].T.copy() for k in range(p)]


def b_from_coeffs(coeffs: Sequence[np.ndarray]) -> np.ndarray:
    """Stack lag matrices into the dp x d regression coefficient block."""
    return np.vstack([np.asarray(a, dtype=float).T for a in coeffs])


def forecast(coeffs: Sequence[np.ndarray], series: TimeSeries, h: int) -> np.ndarray:
    """Iterated h-step-ahead point forecast from the last p observations."""
    if h < 1:
        raise ValueError("forecast horizon must be >= 1")
    coeffs = [np.asarray(a, dtype=float) for a in coeffs]
    p = len(coeffs)
    if series.n < p:
        raise InsufficientDataError(f"need at least p={p} observations, got {series.n}")
    history = [series.values[-k] for k in range(1, p + 1)]  # newest first
    x_next = None
    for _ in range(h):
        x_next = np.zeros(series.d)
        for s, a in enumerate(coeffs):
            x_next += a @ history[s]
        history = [x_next] + history[: p - 1]
    return x_next


def _power_sum(block: np.ndarray, q: float) -> np.ndarray:
    """Entrywise |a|^q with 0^0 := 0, so q = 0 counts nonzeros."""
    mag = np.abs(block)
    if q == 0.0:
        return (mag > 0).astype(float)
    return mag**q


def class_budgets(coeffs: Sequence[np.ndarray], q: float, variant: int) -> dict:
    """Realized budget quantities of a coefficient stack for one class variant.

    Returns the four left-hand sides of the class inequalities: the column
    power budget, the per-column/lag 1-norm bound, the row power budget
    (always summed across lags), and the row-sum bound.
    """
    coeffs = [np.asarray(a, dtype=float) for a in coeffs]
    pw = np.array([_power_sum(a, q) for a in coeffs])  # (p, d, d)
    col_sums = pw.sum(axis=1)  # per lag, per column
    row_sums = pw.sum(axis=2)  # per lag, per row
    one_norms = np.array([np.abs(a).sum(axis=0).max() for a in coeffs])
    inf_norms = np.array([np.abs(a).sum(axis=1).max() for a in coeffs])
    if variant == 1:
        col_budget = col_sums.max() if col_sums.size else 0.0
        m_col = one_norms.max()
    else:
        col_budget = col_sums.sum(axis=0).max()
        m_col = one_norms.sum()
    row_budget = row_sums.sum(axis=0).max()
    m_row = inf_norms.sum()
    return {
        "col_budget": float(col_budget),
        "m_col": float(m_col),
        "row_budget": float(row_budget),
        "m_row": float(m_row),
    }


def class_membership(coeffs: Sequence[np.ndarray], cls: SparsityClass) -> MembershipResult:
    """Check every inequality of the chosen sparsity class.

    Returns pass/fail together with the first violated inequality as a
    human-readable witness.
    """
    coeffs = [np.asarray(a, dtype=float) for a in coeffs]
    if len(coeffs) != cls.p:
        return MembershipResult(False, f"lag count {len(coeffs)} != class p={cls.p}")
    b = class_budgets(coeffs, cls.q, cls.variant)
    scope = "per-lag" if cls.variant == 1 else "summed-across-lags"
    checks = [
        (b["col_budget"], cls.s, f"column power budget ({scope}) {b['col_budget']:.6g} > s={cls.s:.6g}"),
        (b["m_col"], cls.m_bound, f"column-sum bound ({scope}) {b['m_col']:.6g} > M={cls.m_bound:.6g}"),
        (b["row_budget"], cls.s, f"row power budget {b['row_budget']:.6g} > s={cls.s:.6g}"),
        (b["m_row"], cls.m_bound, f"row-sum bound {b['m_row']:.6g} > M={cls.m_bound:.6g}"),
    ]
    for value, bound, witness in checks:
        if value > bound:
            return MembershipResult(False, witness)
    return MembershipResult(True, None)
