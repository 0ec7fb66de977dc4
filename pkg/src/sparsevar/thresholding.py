"""Generalized scalar thresholding rules and their deterministic error bound.

Three rules are provided: soft, adaptive-power (``z (1 - |t/z|^nu)_+``) and
hard.  Soft and adaptive rules satisfy the three shrinkage conditions the
error bound requires (with constants 1 and nu respectively); hard
thresholding violates the first condition and is kept only for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SparsityClass

__all__ = [
    "ThresholdRule",
    "soft_rule",
    "adaptive_rule",
    "hard_rule",
    "threshold_scalar",
    "threshold_matrix",
    "verify_rule_conditions",
    "ConditionReport",
    "theorem1_bound",
]

_KINDS = ("soft", "adaptive", "hard")


@dataclass(frozen=True)
class ThresholdRule:
    """A scalar shrinkage rule; ``nu`` only applies to the adaptive kind."""

    kind: str
    nu: float = 4.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown threshold kind {self.kind!r}")
        if self.kind == "adaptive" and self.nu < 1:
            raise ValueError("adaptive rule requires nu >= 1")

    @property
    def c_const(self) -> float:
        """Shrinkage constant of condition 1.

        Soft thresholding satisfies it with 1.  For the adaptive rule the
        tight constant is nu: near |z| = t the rule shrinks like
        nu (|z| - t), so any smaller constant fails.  Hard thresholding
        violates the condition for every finite constant.
        """
        if self.kind == "soft":
            return 1.0
        if self.kind == "adaptive":
            return float(self.nu)
        raise ValueError("hard thresholding has no valid shrinkage constant")

    @property
    def conforming(self) -> bool:
        return self.kind != "hard"

    def label(self) -> str:
        if self.kind == "adaptive":
            return f"adaptive(nu={self.nu:g})"
        return self.kind


def soft_rule() -> ThresholdRule:
    return ThresholdRule("soft")


def adaptive_rule(nu: float = 4.0) -> ThresholdRule:
    return ThresholdRule("adaptive", nu=nu)


def hard_rule() -> ThresholdRule:
    return ThresholdRule("hard")


def threshold_scalar(rule: ThresholdRule, lam: float, z: float) -> float:
    """Apply one shrinkage rule at level ``lam`` to a scalar."""
    if lam < 0:
        raise ValueError("threshold level must be >= 0")
    if rule.kind == "soft":
        return float(np.sign(z) * max(abs(z) - lam, 0.0))
    if rule.kind == "adaptive":
        if lam == 0.0:
            return float(z)
        if abs(z) <= lam:
            return 0.0
        return float(z * (1.0 - abs(lam / z) ** rule.nu))
    return float(z) if abs(z) > lam else 0.0


def threshold_matrix(rule: ThresholdRule, lam: float, m) -> np.ndarray:
    """Componentwise thresholding; preserves shape."""
    if lam < 0:
        raise ValueError("threshold level must be >= 0")
    a = np.asarray(m, dtype=float)
    mag = np.abs(a)
    if rule.kind == "soft":
        return np.sign(a) * np.maximum(mag - lam, 0.0)
    if rule.kind == "adaptive":
        if lam == 0.0:
            return a.copy()
        out = np.zeros_like(a)
        keep = mag > lam
        out[keep] = a[keep] * (1.0 - (lam / mag[keep]) ** rule.nu)
        return out
    out = np.where(mag > lam, a, 0.0)
    return out


@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    counterexample: str | None


def verify_rule_conditions(rule: ThresholdRule, lam: float, grid) -> ConditionReport:
    """Grid-check the three shrinkage conditions of a rule.

    Over all pairs (z, y) from ``grid`` with |z - y| <= lam it checks
    |THR(z)| <= c |y|; additionally THR(z) = 0 for |z| <= lam and
    |THR(z) - z| <= lam on the whole grid.  Reports the first
    counterexample found.  The constant c is the rule's own for conforming
    rules and 1 for hard thresholding (which is expected to fail).
    """
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    c = rule.c_const if rule.conforming else 1.0
    slack = 1e-12
    thr = np.array([threshold_scalar(rule, lam, z) for z in grid])
    for z, tz in zip(grid, thr):
        if abs(z) <= lam and tz != 0.0:
            return ConditionReport(False, f"condition 2: THR({z:.6g}) = {tz:.6g} != 0")
        if abs(tz - z) > lam + slack:
            return ConditionReport(
                False, f"condition 3: |THR({z:.6g}) - {z:.6g}| = {abs(tz - z):.6g} > {lam:.6g}"
            )
    for z, tz in zip(grid, thr):
        if tz == 0.0:
            continue
        near = grid[np.abs(grid - z) <= lam + slack]
        floor = np.min(np.abs(near))
        if abs(tz) > c * floor + slack:
            y = near[np.argmin(np.abs(near))]
            return ConditionReport(
                False,
                f"condition 1: |THR({z:.6g})| = {abs(tz):.6g} > c|y| = {c * abs(y):.6g}"
                f" at y = {y:.6g}",
            )
    return ConditionReport(True, None)


def theorem1_bound(cls: SparsityClass, c_const: float, t_n: float) -> float:
    """Deterministic thresholding error bound (4 + c) s t^(1-q).

    The caller absorbs any scale constant into ``t_n`` (the threshold level
    equals the componentwise error bound).
    """
    if t_n <= 0:
        raise ValueError("t_n must be positive")
    return (4.0 + c_const) * cls.s * t_n ** (1.0 - cls.q)
