"""Seeded Monte-Carlo benchmark harness.

A scenario fixes a true model (or a per-replication redraw rule), a sample
size, a replication count and a master seed; the runner simulates, fits
every registered estimator configuration, scores the requested criteria
and aggregates mean / standard error / failure counts.  All randomness is
derived from the master seed by stable per-replication key paths, so a
rerun with the same seed is byte-identical and aggregation does not depend
on execution order.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .covariance import CovCvSpec, residuals, thresholded_cov
from .dgp import example1_sigma, random_sparse_var1
from .errors import NumericError
from .estimators import EstimatorConfig, fit
from .metrics import (
    crit_gamma_error,
    crit_param_error,
    crit_spectral_error,
    fourier_frequencies,
    replication_seed,
)
from .model import TimeSeries, VarModel, forecast, simulate, spectral_density
from .serialize import format_float, model_from_text
from .thresholding import ThresholdRule, soft_rule

__all__ = [
    "CRITERIA",
    "Scenario",
    "BenchmarkRow",
    "BenchmarkResult",
    "example1_model",
    "example1_scenario",
    "example2_model",
    "example2_scenario",
    "run_monte_carlo",
    "EXAMPLE2_CELL_SEED",
]

CRITERIA = ("a", "gamma", "spec", "forecast")

# base entropy for the fixed per-cell coefficient draws of the VAR(1) family
EXAMPLE2_CELL_SEED = 20240801

# documented seed of the frozen 14-dimensional VAR(4) coefficient draw
EXAMPLE1_FROZEN_SEED = 31415926


@dataclass(frozen=True)
class Scenario:
    """One benchmark cell: the data-generating process and the run plan."""

    label: str
    model: VarModel
    n: int
    replications: int
    seed: int
    h: int = 1
    burn_in: int = 500
    criteria: tuple[str, ...] = CRITERIA
    norm_gamma: str = "inf"
    norm_spec: str = "inf"
    n_freq: int = 512
    cov_rule: ThresholdRule = field(default_factory=soft_rule)
    model_fn: Callable[[int], VarModel] | None = None  # per-replication redraw

    def __post_init__(self):
        if self.n < 1 or self.replications < 1:
            raise ValueError("n and replications must be positive")
        unknown = set(self.criteria) - set(CRITERIA)
        if unknown:
            raise ValueError(f"unknown criteria {sorted(unknown)}")


@dataclass(frozen=True)
class BenchmarkRow:
    scenario: str
    estimator: str
    criterion: str
    mean: float
    se: float
    failures: int
    replications: int
    seed: int


@dataclass
class BenchmarkResult:
    rows: list[BenchmarkRow]
    raw: dict[tuple[str, str], np.ndarray]

    def value(self, estimator: str, criterion: str) -> float:
        for row in self.rows:
            if row.estimator == estimator and row.criterion == criterion:
                return row.mean
        raise KeyError((estimator, criterion))

    def to_csv(self, provenance: Sequence[str] | None = None) -> str:
        out = io.StringIO()
        for line in provenance or []:
            out.write(f"# {line}\n")
        out.write("scenario,estimator,criterion,mean,se,failures,R,seed\n")
        for r in self.rows:
            out.write(
                f"{r.scenario},{r.estimator},{r.criterion},"
                f"{format_float(r.mean)},{format_float(r.se)},"
                f"{r.failures},{r.replications},{r.seed}\n"
            )
        return out.getvalue()


def example1_model(variant: str = "DM") -> VarModel:
    """The frozen 14-dimensional VAR(4) benchmark model with one of the four
    innovation covariances (DM, DT, FM, FT)."""
    from importlib.resources import files

    text = files("sparsevar").joinpath("data/example1_model.txt").read_text()
    base = model_from_text(text)
    return VarModel(coeffs=base.coeffs, sigma_eps=example1_sigma(variant))


def example1_scenario(
    variant: str,
    n: int = 100,
    replications: int = 100,
    seed: int = 1,
    criteria: tuple[str, ...] = CRITERIA,
) -> Scenario:
    # table convention for this family scores the second-order criteria in
    # the column-sum norm
    return Scenario(
        label=f"example1-{variant}",
        model=example1_model(variant),
        n=n,
        replications=replications,
        seed=seed,
        criteria=criteria,
        norm_gamma="one",
        norm_spec="one",
    )


def example2_model(d: int, s: int, rho: float, redraw_seed: int | None = None) -> VarModel:
    """VAR(1) cell model: random sparse coefficients with identity
    innovation covariance.  The coefficient draw is fixed per (d, s, rho)
    unless an explicit redraw seed is supplied."""
    if redraw_seed is None:
        redraw_seed = replication_seed(EXAMPLE2_CELL_SEED, d, s, int(round(rho * 100)))
    a = random_sparse_var1(d, s, rho, seed=redraw_seed)
    return VarModel(coeffs=(a,), sigma_eps=np.eye(d))


def example2_scenario(
    d: int,
    s: int,
    rho: float,
    n: int = 100,
    replications: int = 100,
    seed: int = 1,
    criteria: tuple[str, ...] = CRITERIA,
    redraw_per_replication: bool = False,
) -> Scenario:
    label = f"example2-d{d}-s{s}-rho{rho:g}"
    model = example2_model(d, s, rho)
    model_fn = None
    if redraw_per_replication:
        cell = replication_seed(EXAMPLE2_CELL_SEED, d, s, int(round(rho * 100)))

        def model_fn(rep: int) -> VarModel:
            return example2_model(d, s, rho, redraw_seed=replication_seed(cell, rep))

    return Scenario(
        label=label,
        model=model,
        n=n,
        replications=replications,
        seed=seed,
        criteria=criteria,
        model_fn=model_fn,
    )


class _TrueQuantities:
    """Per-model cache of the reference quantities the criteria compare to."""

    def __init__(self, scenario: Scenario):
        self._scenario = scenario
        self._density: dict[int, list[np.ndarray]] = {}

    def density(self, model: VarModel) -> list[np.ndarray] | None:
        if "spec" not in self._scenario.criteria:
            return None
        key = id(model)
        if key not in self._density:
            omegas = fourier_frequencies(self._scenario.n_freq)
            self._density[key] = [spectral_density(model, om) for om in omegas]
            if len(self._density) > 4:  # redraw scenarios: do not hoard
                self._density = {key: self._density[key]}
        return self._density[key]


def _run_replication(
    scenario: Scenario,
    configs: Mapping[str, EstimatorConfig],
    rep: int,
    cache: _TrueQuantities,
) -> dict[tuple[str, str], float]:
    """All criterion values of one replication, keyed by (estimator, criterion)."""
    needs_sigma = bool({"gamma", "spec"} & set(scenario.criteria))
    extra = scenario.h if "forecast" in scenario.criteria else 0
    rep_seed = replication_seed(scenario.seed, rep)
    model = scenario.model_fn(rep) if scenario.model_fn is not None else scenario.model
    sim = simulate(model, scenario.n + extra, burn_in=scenario.burn_in, seed=rep_seed)
    train = TimeSeries(values=sim.values[: scenario.n])
    sigma2 = np.diag(model.sigma_eps)
    out: dict[tuple[str, str], float] = {}
    for c_idx, (name, cfg) in enumerate(configs.items()):
        fit_seed = replication_seed(scenario.seed, rep, c_idx + 1)
        try:
            est = fit(cfg, train, model.p, seed=fit_seed)
        except NumericError:
            continue  # all criteria stay non-finite for this replication
        coeffs = est.coeff_list()
        sigma_hat = None
        if needs_sigma:
            try:
                res = residuals(train, est, center=True)
                sigma_hat = thresholded_cov(
                    res,
                    scenario.cov_rule,
                    CovCvSpec(seed=replication_seed(scenario.seed, rep, c_idx + 1, 1)),
                )
            except NumericError:
                sigma_hat = None
        for crit in scenario.criteria:
            try:
                if crit == "a":
                    val = crit_param_error(model, coeffs)
                elif crit == "gamma":
                    val = (
                        crit_gamma_error(model, coeffs, sigma_hat, scenario.norm_gamma)
                        if sigma_hat is not None
                        else float("inf")
                    )
                elif crit == "spec":
                    val = (
                        crit_spectral_error(
                            model, coeffs, sigma_hat, scenario.norm_spec,
                            scenario.n_freq, true_density=cache.density(model),
                        )
                        if sigma_hat is not None
                        else float("inf")
                    )
                else:
                    x_hat = forecast(coeffs, train, scenario.h)
                    err = x_hat - sim.values[scenario.n + scenario.h - 1]
                    val = float(np.mean(err**2 / sigma2))
                out[(name, crit)] = val
            except NumericError:
                pass
    return out


def run_monte_carlo(
    scenario: Scenario,
    configs: Mapping[str, EstimatorConfig],
    rep_order: Sequence[int] | None = None,
    threads: int = 1,
) -> BenchmarkResult:
    """Run every estimator configuration over the scenario's replications.

    ``rep_order`` only changes the execution order and ``threads`` only the
    concurrency; results are stored by replication index and every seed is
    derived from (master seed, replication index), so the output is
    identical for any permutation or thread count.  Estimator failures
    inside a replication are recorded as non-finite values and counted,
    never aborting the remaining work.
    """
    names = list(configs)
    order = list(rep_order) if rep_order is not None else list(range(scenario.replications))
    if sorted(order) != list(range(scenario.replications)):
        raise ValueError("rep_order must be a permutation of range(replications)")
    values = {
        (name, crit): np.full(scenario.replications, np.nan)
        for name in names
        for crit in scenario.criteria
    }
    cache = _TrueQuantities(scenario)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(
                lambda rep: (rep, _run_replication(scenario, configs, rep, cache)), order
            )
            for rep, out in results:
                for key, val in out.items():
                    values[key][rep] = val
    else:
        for rep in order:
            for key, val in _run_replication(scenario, configs, rep, cache).items():
                values[key][rep] = val
    rows = []
    for name in names:
        for crit in scenario.criteria:
            arr = values[(name, crit)]
            finite = arr[np.isfinite(arr)]
            failures = int(scenario.replications - finite.size)
            mean = float(finite.mean()) if finite.size else float("nan")
            se = (
                float(finite.std(ddof=1) / np.sqrt(finite.size))
                if finite.size > 1
                else 0.0
            )
            rows.append(
                BenchmarkRow(
                    scenario=scenario.label,
                    estimator=name,
                    criterion=crit,
                    mean=mean,
                    se=se,
                    failures=failures,
                    replications=scenario.replications,
                    seed=scenario.seed,
                )
            )
    return BenchmarkResult(rows=rows, raw=values)
