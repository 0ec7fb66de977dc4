"""Self-contained oracle and property checks, runnable without pytest.

Each check recomputes its expectation through an independent route (brute
force, enumeration, closed forms, raw-data recomputation) and compares the
package's primary implementation against it.  The CLI ``verify`` command
runs the whole battery and reports pass/fail counts.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .covariance import residuals_from_design, sample_cov
from .dgp import random_sparse_var1, random_sparse_varp
from .estimators import dantzig_row, lasso_row
from .lp import LpProblem, lp_solve
from .metrics import (
    matrix_norm,
    replication_seed,
    theorem3_bound_check,
    theorem4_bound_check,
)
from .model import (
    SampleDesign,
    SparsityClass,
    VarModel,
    autocov,
    build_design,
    class_budgets,
    companion,
    simulate,
    spectral_density,
    inverse_spectral_density,
    stationary_cov_stacked,
)
from .thresholding import adaptive_rule, soft_rule, theorem1_bound, threshold_matrix

__all__ = ["CheckResult", "run_all_checks", "vertex_optimum", "random_stable_model"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_stable_model(seed: int, d_max: int = 20, p_max: int = 4, rho_max: float = 0.95) -> VarModel:
    """A random stable sparse VAR model for oracle sweeps."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, d_max + 1))
    p = int(rng.integers(1, p_max + 1))
    s = int(rng.integers(1, min(d, 5) + 1))
    rho = float(rng.uniform(0.2, rho_max))
    coeffs = random_sparse_varp(d, s * p if p > 1 else s, rho, p, int(rng.integers(2**31)))
    scale = rng.uniform(0.5, 2.0, size=d)
    sigma = np.diag(scale)
    mix = rng.standard_normal((d, d)) * 0.1
    sigma = sigma + mix @ mix.T  # positive definite
    sigma = 0.5 * (sigma + sigma.T)
    return VarModel(coeffs=tuple(coeffs), sigma_eps=sigma)


def vertex_optimum(problem: LpProblem, tol: float = 1e-9) -> float | None:
    """Optimal objective by brute-force vertex enumeration.

    Vertices of {G x <= h, x >= 0} are n-subsets of active constraints from
    the rows of [G; -I]; infeasibility returns None.  Subset systems are
    solved in one batched call (singular subsets filtered by determinant).
    """
    n = problem.n_vars
    rows = np.vstack([problem.g_mat, -np.eye(n)])
    rhs = np.concatenate([problem.h, np.zeros(n)])
    m_all = rows.shape[0]
    combos = np.array(list(itertools.combinations(range(m_all), n)))
    subs = rows[combos]  # (n_combos, n, n)
    keep = np.abs(np.linalg.det(subs)) > 1e-10
    if not keep.any():
        return None
    solutions = np.linalg.solve(subs[keep], rhs[combos[keep]][..., None])[..., 0]
    feasible = (
        np.all(solutions @ problem.g_mat.T <= problem.h + tol, axis=1)
        & np.all(solutions >= -tol, axis=1)
    )
    if not feasible.any():
        return None
    return float(np.min(solutions[feasible] @ problem.c))


def _check(name, passed, detail="") -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def check_lyapunov(n_models: int = 20, seed: int = 101) -> CheckResult:
    worst = 0.0
    for i in range(n_models):
        model = random_stable_model(replication_seed(seed, i))
        gamma = stationary_cov_stacked(model, tol=1e-10)
        a = companion(model).a_stack
        s_u = np.zeros_like(gamma)
        s_u[: model.d, : model.d] = model.sigma_eps
        resid = np.max(np.abs(gamma - a @ gamma @ a.T - s_u))
        worst = max(worst, resid)
    ar = VarModel(coeffs=(np.array([[0.5]]),), sigma_eps=np.array([[1.0]]))
    closed = [4.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]
    ar_err = max(abs(autocov(ar, h)[0, 0] - c) for h, c in enumerate(closed))
    ok = worst <= 1e-8 and ar_err <= 1e-10
    return _check(
        "lyapunov-residual",
        ok,
        f"max residual {worst:.2e} over {n_models} models; AR(1) closed-form error {ar_err:.2e}",
    )


def check_spectral_identity(n_models: int = 5, seed: int = 202, n_freq: int = 4096) -> CheckResult:
    worst_sum = 0.0
    worst_id = 0.0
    for i in range(n_models):
        model = random_stable_model(replication_seed(seed, i), d_max=8, rho_max=0.9)
        omegas = 2.0 * math.pi * np.arange(-(n_freq // 2), n_freq // 2) / n_freq
        acc = np.zeros((model.d, model.d), dtype=complex)
        for om in omegas:
            acc += spectral_density(model, om)
        gamma0 = autocov(model, 0)
        worst_sum = max(worst_sum, float(np.max(np.abs(acc * 2 * math.pi / n_freq - gamma0))))
        sigma_inv = np.linalg.inv(model.sigma_eps)
        for om in np.linspace(-math.pi, math.pi, 32):
            fid = spectral_density(model, om) @ inverse_spectral_density(
                model.coeffs, sigma_inv, om
            )
            worst_id = max(worst_id, float(np.max(np.abs(fid - np.eye(model.d)))))
    ok = worst_sum <= 1e-4 and worst_id <= 1e-8
    return _check(
        "spectral-identity",
        ok,
        f"Riemann-sum gap {worst_sum:.2e}; f * f^-1 identity gap {worst_id:.2e}",
    )


def check_kkt(n_designs: int = 5, seed: int = 303) -> CheckResult:
    worst = 0.0
    rng = np.random.default_rng(seed)
    for _ in range(n_designs):
        n, dp = 60, 8
        x = rng.standard_normal((n, dp))
        beta_true = np.zeros(dp)
        beta_true[:2] = (1.0, -0.5)
        y = x @ beta_true + 0.2 * rng.standard_normal(n)
        design = SampleDesign(y_mat=y[:, None], x_mat=x, n_eff=n, p=dp, d=1)
        for lam in (0.0, 0.05, 0.2):
            w = rng.uniform(0.5, 2.0, size=dp)
            beta = lasso_row(design, 0, lam, weights=w, tol=1e-8)
            # independent recomputation from raw data
            grad = x.T @ (y - x @ beta) / n
            lw = lam * w
            zero = beta == 0.0
            viol = 0.0
            if zero.any():
                viol = float(np.max(np.abs(grad[zero]) - lw[zero]))
            if (~zero).any():
                viol = max(
                    viol,
                    float(np.max(np.abs(grad[~zero] - lw[~zero] * np.sign(beta[~zero])))),
                )
            worst = max(worst, viol)
    return _check("lasso-kkt", worst <= 1e-6, f"worst raw-data KKT violation {worst:.2e}")


def check_lp_oracle(n_problems: int = 50, seed: int = 404) -> CheckResult:
    rng = np.random.default_rng(seed)
    solved = 0
    worst = 0.0
    for _ in range(n_problems):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(2, 9))
        g = rng.standard_normal((m, n))
        h = rng.standard_normal(m) + 1.0
        c = rng.standard_normal(n)
        # a box row keeps the feasible set bounded, so enumeration is exact
        g = np.vstack([g, np.ones(n)])
        h = np.concatenate([h, [10.0]])
        problem = LpProblem(c=c, g_mat=g, h=h)
        oracle = vertex_optimum(problem)
        try:
            sol = lp_solve(problem)
        except Exception as exc:  # infeasible/unbounded must agree with oracle
            if oracle is None:
                solved += 1
                continue
            return _check("lp-vertex-oracle", False, f"solver raised {exc!r} but oracle found {oracle}")
        if oracle is None:
            return _check("lp-vertex-oracle", False, "solver returned a point on an infeasible problem")
        worst = max(worst, abs(sol.objective - oracle))
        solved += 1
    ok = worst <= 1e-8 and solved == n_problems
    return _check("lp-vertex-oracle", ok, f"{solved} LPs, worst objective gap {worst:.2e}")


def check_dantzig(seed: int = 505) -> CheckResult:
    rng = np.random.default_rng(seed)
    dp = 4
    n = dp  # X = 2 I gives X'X/n exactly the identity
    x = np.eye(dp) * 2.0
    exact = True
    for _ in range(50):
        y = (x @ rng.standard_normal(dp) * 2)[:, None]
        design = SampleDesign(y_mat=y, x_mat=x, n_eff=n, p=dp, d=1)
        lam = float(abs(rng.standard_normal()) * 0.5)
        b = design.cross[:, 0]
        got = dantzig_row(design, 0, lam)
        want = np.sign(b) * np.maximum(np.abs(b) - lam, 0.0)
        exact = exact and np.array_equal(got, want)
    # feasibility + l1 dominance on a correlated design
    x = rng.standard_normal((80, 6))
    beta_true = np.array([1.0, 0.0, -0.5, 0.0, 0.0, 0.25])
    y = (x @ beta_true + 0.1 * rng.standard_normal(80))[:, None]
    design = SampleDesign(y_mat=y, x_mat=x, n_eff=80, p=6, d=1)
    ok_dom = True
    for lam in (0.05, 0.1, 0.3):
        beta = dantzig_row(design, 0, lam)
        feas = np.max(np.abs(design.gram @ beta - design.cross[:, 0]))
        if feas > lam + 1e-9:
            return _check("dantzig-certificates", False, f"feasibility violated: {feas:.3g} > {lam}")
        resid_true = np.max(np.abs(design.gram @ beta_true - design.cross[:, 0]))
        if resid_true <= lam and np.abs(beta).sum() > np.abs(beta_true).sum() + 1e-8:
            ok_dom = False
    return _check(
        "dantzig-certificates",
        exact and ok_dom,
        "identity-gram soft-threshold equality exact; feasibility and l1 dominance hold",
    )


def check_theorem1(n_sets: int = 10, n_perturb: int = 5, seed: int = 606) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_gap = -np.inf
    for i in range(n_sets):
        d = int(rng.integers(3, 9))
        p = int(rng.integers(1, 4))
        s_gen = int(rng.integers(1, 4))
        coeffs = random_sparse_varp(
            d, s_gen * p if p > 1 else s_gen, float(rng.uniform(0.3, 0.9)), p,
            int(rng.integers(2**31)),
        )
        for q in (0.0, 0.5):
            budgets = class_budgets(coeffs, q, variant=1)
            s_class = max(budgets["col_budget"], budgets["row_budget"])
            cls = SparsityClass(variant=1, q=q, s=max(s_class, 1e-12), m_bound=1e6, p=p)
            for _ in range(n_perturb):
                t_n = float(rng.uniform(0.01, 0.2))
                pert = [
                    a + rng.uniform(-t_n, t_n, size=a.shape) for a in coeffs
                ]
                for rule in (soft_rule(), adaptive_rule(4.0)):
                    thr = [threshold_matrix(rule, t_n, b) for b in pert]
                    bound = theorem1_bound(cls, rule.c_const, t_n)
                    sigma = np.eye(d)
                    comp_t = companion(VarModel(coeffs=tuple(coeffs), sigma_eps=sigma)).a_stack
                    comp_e = companion(VarModel(coeffs=tuple(thr), sigma_eps=sigma)).a_stack
                    for kind in ("one", "inf"):
                        err = matrix_norm(comp_t - comp_e, kind)
                        worst_gap = max(worst_gap, err - bound)
    return _check("theorem1-bound", worst_gap <= 1e-9, f"worst (error - bound) = {worst_gap:.2e}")


def check_theorem34(n_pairs: int = 10, seed: int = 707) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst3 = -np.inf
    worst4 = -np.inf
    for i in range(n_pairs):
        model = random_stable_model(replication_seed(seed, i), d_max=6, p_max=2, rho_max=0.85)
        scale = 0.02 * rng.uniform(0.2, 1.0)
        est_coeffs = [a + scale * rng.standard_normal(a.shape) for a in model.coeffs]
        est_sigma = model.sigma_eps + scale * _sym(rng, model.d)
        est_sigma = est_sigma + model.d * scale * np.eye(model.d)
        for kind in ("one", "inf"):
            lhs, rhs = theorem3_bound_check(model, est_coeffs, est_sigma, kind, h=0)
            worst3 = max(worst3, lhs - rhs)
            sigma_inv = np.linalg.inv(model.sigma_eps)
            est_inv = np.linalg.inv(est_sigma)
            lhs4, rhs4 = theorem4_bound_check(
                model.coeffs, sigma_inv, est_coeffs, est_inv, kind
            )
            worst4 = max(worst4, lhs4 - rhs4)
    ok = worst3 <= 1e-9 and worst4 <= 1e-9
    return _check(
        "theorem34-bounds", ok, f"worst slack: acf {worst3:.2e}, inverse-spectral {worst4:.2e}"
    )


def _sym(rng, d):
    m = rng.standard_normal((d, d))
    return 0.5 * (m + m.T)


def check_design_reconstruction(seed: int = 808) -> CheckResult:
    model = random_stable_model(seed, d_max=5, p_max=3)
    series, eps = simulate(model, 60, burn_in=50, seed=seed, return_innovations=True)
    design = build_design(series, model.p)
    b = np.vstack([a.T for a in model.coeffs])
    resid = residuals_from_design(design, b, center=False)
    recorded = eps[model.p :][::-1]
    gap = float(np.max(np.abs(resid.values - recorded)))
    cov = sample_cov(resid)
    ok = gap <= 1e-10 and cov.shape == (model.d, model.d)
    return _check("design-reconstruction", ok, f"innovation reconstruction gap {gap:.2e}")


ALL_CHECKS = (
    check_lyapunov,
    check_spectral_identity,
    check_kkt,
    check_lp_oracle,
    check_dantzig,
    check_theorem1,
    check_theorem34,
    check_design_reconstruction,
)


def run_all_checks(quick: bool = False) -> list[CheckResult]:
    results = []
    for fn in ALL_CHECKS:
        if quick and fn is check_spectral_identity:
            results.append(check_spectral_identity(n_models=2, n_freq=1024))
            continue
        results.append(fn())
    return results
