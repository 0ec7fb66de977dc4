"""Command-line front end.

A single flat config file drives every run.  ``key = value`` lines under
``[section]`` headers; the ``[run]`` section picks the command
(simulate | estimate | benchmark | verify).  Unknown keys are rejected
with a suggestion.  Every output file carries provenance comment lines
(version, config hash, seed).

Exit codes: 0 success, 2 configuration, 3 data, 4 numerical, 5 internal.
"""
from __future__ import annotations

import argparse
import configparser
import difflib
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    CRITERIA,
    Scenario,
    example1_scenario,
    example2_scenario,
    run_monte_carlo,
)
from .covariance import CovCvSpec, residuals, thresholded_cov
from .errors import ConfigError, DataError, InternalError, NumericError, SparseVarError
from .estimators import EstimatorConfig, fit
from .metrics import crit_gamma_error, crit_param_error, crit_spectral_error
from .model import TimeSeries, VarModel, simulate, spectral_radius, companion
from .serialize import (
    model_from_text,
    model_to_text,
    matrix_to_text,
    series_from_csv,
    series_to_csv,
)
from .thresholding import ThresholdRule, adaptive_rule, hard_rule, soft_rule
from .tuning import TuningRule
from .verify import run_all_checks

__all__ = ["RunConfig", "parse_config", "run", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5

_RUN_KEYS = {"command", "seed", "out", "threads"}
_SIMULATE_KEYS = {"model", "n", "burn_in"}
_ESTIMATE_KEYS = {"series", "p", "truth", "center"}
_SCENARIO_KEYS = {
    "kind", "variant", "d", "s", "rho", "n", "replications", "h",
    "criteria", "n_freq", "burn_in", "redraw",
}
_ESTIMATOR_KEYS = {
    "method", "standardize", "adaptive", "threshold", "tuning", "eric_nu",
    "lambda_grid", "threshold_rule", "threshold_nu", "threshold_scale",
    "reuse_lambda", "tol",
}
_COMMANDS = ("simulate", "estimate", "benchmark", "verify")


@dataclass
class RunConfig:
    command: str
    seed: int | None
    out: Path
    threads: int
    config_text: str
    simulate: dict = field(default_factory=dict)
    estimate: dict = field(default_factory=dict)
    scenario: dict = field(default_factory=dict)
    estimators: dict = field(default_factory=dict)  # name -> key/value dict

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.config_text.encode()).hexdigest()[:16]

    def provenance(self) -> list[str]:
        return [
            f"sparsevar v{__version__}",
            f"command: {self.command}",
            f"config-sha256: {self.config_hash}",
            f"seed: {self.seed}",
        ]


def _reject_unknown(section: str, keys, allowed: set[str]) -> None:
    for key in keys:
        if key not in allowed:
            hint = difflib.get_close_matches(key, sorted(allowed), n=1)
            suggestion = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(f"unknown key {key!r} in section [{section}]{suggestion}")


def _get_int(section: dict, name: str, key: str, default=None) -> int | None:
    if key not in section:
        if default is None:
            return None
        return default
    try:
        return int(section[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r} in [{name}] must be an integer: {exc}") from exc


def _get_float(section: dict, name: str, key: str, default=None):
    if key not in section:
        return default
    try:
        return float(section[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r} in [{name}] must be a number: {exc}") from exc


def _get_bool(section: dict, name: str, key: str, default=False) -> bool:
    if key not in section:
        return default
    value = section[key].strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r} in [{name}] must be a boolean, got {section[key]!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate the structured run configuration."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if "run" not in parser:
        raise ConfigError("missing required section [run]")
    run_section = dict(parser["run"])
    _reject_unknown("run", run_section, _RUN_KEYS)
    command = run_section.get("command")
    if command not in _COMMANDS:
        raise ConfigError(
            f"key 'command' in [run] must be one of {', '.join(_COMMANDS)}; got {command!r}"
        )
    seed = _get_int(run_section, "run", "seed")
    threads = _get_int(run_section, "run", "threads", default=1)
    out = Path(run_section.get("out", "."))

    cfg = RunConfig(
        command=command, seed=seed, out=out, threads=threads, config_text=text
    )
    for section in parser.sections():
        if section == "run":
            continue
        body = dict(parser[section])
        if section == "simulate":
            _reject_unknown(section, body, _SIMULATE_KEYS)
            cfg.simulate = body
        elif section == "estimate":
            _reject_unknown(section, body, _ESTIMATE_KEYS | _ESTIMATOR_KEYS)
            cfg.estimate = body
        elif section == "scenario":
            _reject_unknown(section, body, _SCENARIO_KEYS)
            cfg.scenario = body
        elif section.startswith("estimator"):
            name = section[len("estimator"):].strip() or f"estimator{len(cfg.estimators)}"
            _reject_unknown(section, body, _ESTIMATOR_KEYS)
            cfg.estimators[name] = body
        else:
            raise ConfigError(f"unknown section [{section}]")

    if command in ("simulate", "estimate", "benchmark") and seed is None:
        raise ConfigError(f"command {command!r} is stochastic and requires a seed")
    if command == "simulate" and "model" not in cfg.simulate:
        raise ConfigError("[simulate] requires key 'model' (path to a model file)")
    if command == "estimate" and "series" not in cfg.estimate:
        raise ConfigError("[estimate] requires key 'series' (path to a series CSV)")
    if command == "benchmark" and "kind" not in cfg.scenario:
        raise ConfigError("[scenario] requires key 'kind' (example1 | example2)")
    if command == "benchmark" and not cfg.estimators:
        raise ConfigError("benchmark requires at least one [estimator <name>] section")
    return cfg


def _estimator_config(name: str, body: dict) -> EstimatorConfig:
    method = body.get("method")
    if method not in ("row_lasso", "vec_lasso", "row_dantzig"):
        raise ConfigError(
            f"estimator {name!r}: method must be row_lasso | vec_lasso | row_dantzig"
        )
    rule_name = body.get("tuning", "bic").lower()
    if rule_name not in ("bic", "eric"):
        raise ConfigError(f"estimator {name!r}: tuning must be bic or eric")
    tuning = TuningRule(rule_name, nu=_get_float(body, name, "eric_nu", 1.0))
    grid_size, grid_ratio = 50, None
    if "lambda_grid" in body:
        parts = body["lambda_grid"].replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(
                f"estimator {name!r}: lambda_grid must be 'SIZE RATIO', got {body['lambda_grid']!r}"
            )
        grid_size, grid_ratio = int(parts[0]), float(parts[1])
    thr_kind = body.get("threshold_rule", "adaptive")
    thr_nu = _get_float(body, name, "threshold_nu", 4.0)
    if thr_kind == "adaptive":
        thr_rule: ThresholdRule = adaptive_rule(thr_nu)
    elif thr_kind == "soft":
        thr_rule = soft_rule()
    elif thr_kind == "hard":
        thr_rule = hard_rule()
    else:
        raise ConfigError(f"estimator {name!r}: threshold_rule must be soft | adaptive | hard")
    return EstimatorConfig(
        method=method,
        standardize=_get_bool(body, name, "standardize"),
        adaptive=_get_bool(body, name, "adaptive"),
        threshold=_get_bool(body, name, "threshold"),
        tuning=tuning,
        grid_size=grid_size,
        grid_ratio=grid_ratio,
        threshold_rule=thr_rule,
        threshold_scale=_get_float(body, name, "threshold_scale", 1.0),
        reuse_lambda=_get_bool(body, name, "reuse_lambda"),
        tol=_get_float(body, name, "tol", 1e-8),
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _cmd_simulate(cfg: RunConfig) -> int:
    model_path = Path(cfg.simulate["model"])
    if not model_path.exists():
        raise DataError(f"model file {model_path} does not exist")
    model = model_from_text(model_path.read_text())
    n = _get_int(cfg.simulate, "simulate", "n", 200)
    burn_in = _get_int(cfg.simulate, "simulate", "burn_in", 500)
    series = simulate(model, n, burn_in=burn_in, seed=cfg.seed)
    _write(cfg.out / "series.csv", series_to_csv(series, cfg.provenance()))
    print(f"wrote {cfg.out / 'series.csv'} ({series.n} x {series.d})")
    return EXIT_OK


def _cmd_estimate(cfg: RunConfig) -> int:
    series_path = Path(cfg.estimate["series"])
    if not series_path.exists():
        raise DataError(f"series file {series_path} does not exist")
    series = series_from_csv(series_path.read_text())
    p = _get_int(cfg.estimate, "estimate", "p", 1)
    est_cfg = _estimator_config("estimate", cfg.estimate)
    estimate = fit(est_cfg, series, p, seed=cfg.seed)
    res = residuals(series, estimate, center=_get_bool(cfg.estimate, "estimate", "center", True))
    sigma_hat = thresholded_cov(res, soft_rule(), CovCvSpec(seed=cfg.seed))
    est_model = VarModel(
        coeffs=tuple(estimate.coeff_list()), sigma_eps=0.5 * (sigma_hat + sigma_hat.T)
    )
    _write(cfg.out / "estimate_model.txt", model_to_text(est_model, cfg.provenance()))
    _write(cfg.out / "estimate_sigma.txt", matrix_to_text(sigma_hat, cfg.provenance()))

    lines = [f"# {line}" for line in cfg.provenance()]
    lines.append(f"label = {est_cfg.label()}")
    lams = ", ".join(f"{v:.6g}" for v in estimate.lambdas)
    lines.append(f"lambdas = {lams}")
    rho_hat = spectral_radius(companion(est_model).a_stack)
    lines.append(f"companion_radius = {rho_hat:.6g}")
    truth_path = cfg.estimate.get("truth")
    if truth_path:
        truth = model_from_text(Path(truth_path).read_text())
        lines.append(f"crit_a = {crit_param_error(truth, estimate):.10g}")
        lines.append(f"crit_gamma = {crit_gamma_error(truth, estimate, sigma_hat):.10g}")
        lines.append(
            f"crit_spec = {crit_spectral_error(truth, estimate, sigma_hat, n_freq=256):.10g}"
        )
    report = "\n".join(lines) + "\n"
    _write(cfg.out / "estimate_report.txt", report)
    print(f"wrote estimate outputs to {cfg.out}")
    return EXIT_OK


def _scenario_from_config(cfg: RunConfig) -> Scenario:
    sc = cfg.scenario
    kind = sc.get("kind")
    criteria = tuple(
        c.strip() for c in sc.get("criteria", ",".join(CRITERIA)).split(",") if c.strip()
    )
    for c in criteria:
        if c not in CRITERIA:
            raise ConfigError(f"unknown criterion {c!r}; choose from {', '.join(CRITERIA)}")
    n = _get_int(sc, "scenario", "n", 100)
    reps = _get_int(sc, "scenario", "replications", 100)
    if kind == "example1":
        variant = sc.get("variant", "DM").upper()
        scenario = example1_scenario(
            variant, n=n, replications=reps, seed=cfg.seed, criteria=criteria
        )
    elif kind == "example2":
        d = _get_int(sc, "scenario", "d", 10)
        s = _get_int(sc, "scenario", "s", 1)
        rho = _get_float(sc, "scenario", "rho", 0.8)
        scenario = example2_scenario(
            d, s, rho, n=n, replications=reps, seed=cfg.seed, criteria=criteria,
            redraw_per_replication=_get_bool(sc, "scenario", "redraw"),
        )
    else:
        raise ConfigError(f"scenario kind must be example1 or example2, got {kind!r}")
    return scenario


def _cmd_benchmark(cfg: RunConfig) -> int:
    scenario = _scenario_from_config(cfg)
    configs = {name: _estimator_config(name, body) for name, body in cfg.estimators.items()}
    result = run_monte_carlo(scenario, configs, threads=cfg.threads)
    _write(cfg.out / "benchmark.csv", result.to_csv(cfg.provenance()))
    print(f"wrote {cfg.out / 'benchmark.csv'} ({len(result.rows)} rows)")
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    results = run_all_checks()
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit status."""
    dispatch = {
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "benchmark": _cmd_benchmark,
        "verify": _cmd_verify,
    }
    return dispatch[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sparsevar",
        description="Sparse VAR estimation and benchmark runner",
    )
    parser.add_argument("--config", required=True, help="path to the run config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=None, help="worker thread count")
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)
    try:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        cfg = parse_config(path.read_text())
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        if args.out is not None:
            cfg.out = Path(args.out)
        if cfg.command in ("simulate", "estimate", "benchmark") and cfg.seed is None:
            raise ConfigError(f"command {cfg.command!r} requires a seed")
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SparseVarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
