import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sparsevar as sv
from sparsevar.thresholding import ConditionReport
from sparsevar.verify import random_stable_model


class TestScalarRules:
    def test_soft(self):
        rule = sv.soft_rule()
        assert sv.threshold_scalar(rule, 0.5, 1.2) == pytest.approx(0.7)
        assert sv.threshold_scalar(rule, 0.5, -0.3) == 0.0
        assert sv.threshold_scalar(rule, 0.5, -1.2) == pytest.approx(-0.7)

    def test_adaptive(self):
        rule = sv.adaptive_rule(4.0)
        assert sv.threshold_scalar(rule, 1.0, 2.0) == pytest.approx(1.875)
        assert sv.threshold_scalar(rule, 1.0, 0.5) == 0.0
        assert sv.threshold_scalar(rule, 1.0, 0.0) == 0.0

    def test_hard(self):
        rule = sv.hard_rule()
        assert sv.threshold_scalar(rule, 1.0, 1.01) == 1.01
        assert sv.threshold_scalar(rule, 1.0, 0.99) == 0.0

    def test_zero_level_is_identity(self):
        for rule in (sv.soft_rule(), sv.adaptive_rule(4.0), sv.hard_rule()):
            for z in (-2.5, 0.0, 0.3):
                assert sv.threshold_scalar(rule, 0.0, z) == z

    def test_invalid(self):
        with pytest.raises(ValueError):
            sv.ThresholdRule("banana")
        with pytest.raises(ValueError):
            sv.adaptive_rule(0.5)
        with pytest.raises(ValueError):
            sv.threshold_scalar(sv.soft_rule(), -0.1, 1.0)

    def test_c_const(self):
        assert sv.soft_rule().c_const == 1.0
        assert sv.adaptive_rule(4.0).c_const == 4.0
        with pytest.raises(ValueError):
            sv.hard_rule().c_const

    @settings(max_examples=200)
    @given(
        z=st.floats(-50, 50),
        lam=st.floats(0, 10),
        kind=st.sampled_from(["soft", "adaptive"]),
    )
    def test_shrinkage_sign_support_properties(self, z, lam, kind):
        rule = sv.soft_rule() if kind == "soft" else sv.adaptive_rule(4.0)
        out = sv.threshold_scalar(rule, lam, z)
        assert abs(out) <= abs(z) + 1e-15
        assert out * z >= 0.0
        if abs(z) <= lam:
            assert out == 0.0
        assert abs(out - z) <= lam + 1e-12 * max(1.0, abs(z))

    @settings(max_examples=100)
    @given(z=st.floats(-50, 50), lam=st.floats(0, 10))
    def test_hard_support_and_distance(self, z, lam):
        out = sv.threshold_scalar(sv.hard_rule(), lam, z)
        if abs(z) <= lam:
            assert out == 0.0
        assert abs(out - z) <= lam + 1e-12 * max(1.0, abs(z))


class TestMatrixRule:
    def test_zero_matrix(self):
        out = sv.threshold_matrix(sv.soft_rule(), 0.5, np.zeros((3, 2)))
        assert np.array_equal(out, np.zeros((3, 2)))

    def test_soft_example(self):
        m = np.array([[2.0, 0.5], [-3.0, 1.0]])
        out = sv.threshold_matrix(sv.soft_rule(), 1.0, m)
        assert np.array_equal(out, np.array([[1.0, 0.0], [-2.0, 0.0]]))

    def test_level_above_max_zeroes_everything(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((4, 4))
        lam = np.abs(m).max() + 0.1
        for rule in (sv.soft_rule(), sv.adaptive_rule(4.0), sv.hard_rule()):
            assert np.array_equal(sv.threshold_matrix(rule, lam, m), np.zeros((4, 4)))

    def test_matches_scalar_map(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((3, 5))
        for rule in (sv.soft_rule(), sv.adaptive_rule(2.0), sv.hard_rule()):
            out = sv.threshold_matrix(rule, 0.7, m)
            expected = np.array(
                [[sv.threshold_scalar(rule, 0.7, v) for v in row] for row in m]
            )
            assert np.allclose(out, expected, atol=1e-15)


class TestRuleConditions:
    def test_soft_passes(self):
        grid = np.linspace(-5, 5, 401)
        report = sv.verify_rule_conditions(sv.soft_rule(), 0.8, grid)
        assert isinstance(report, ConditionReport)
        assert report.passed

    def test_hard_fails_condition_one(self):
        grid = np.concatenate([np.linspace(-5, 5, 101), [1.01, 0.02]])
        report = sv.verify_rule_conditions(sv.hard_rule(), 1.0, grid)
        assert not report.passed
        assert "condition 1" in report.counterexample

    def test_adaptive_passes(self):
        grid = np.linspace(-5, 5, 801)
        report = sv.verify_rule_conditions(sv.adaptive_rule(4.0), 1.0, grid)
        assert report.passed

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            sv.verify_rule_conditions(sv.soft_rule(), 1.0, [])


class TestTheoremBound:
    def test_arithmetic(self):
        cls = sv.SparsityClass(variant=1, q=0.0, s=2, m_bound=1, p=1)
        assert sv.theorem1_bound(cls, 1.0, 0.1) == pytest.approx(1.0)
        cls2 = sv.SparsityClass(variant=1, q=0.5, s=4, m_bound=1, p=1)
        assert sv.theorem1_bound(cls2, 1.0, 0.01) == pytest.approx(2.0)

    def test_vanishes_with_level(self):
        cls = sv.SparsityClass(variant=1, q=0.3, s=3, m_bound=1, p=2)
        values = [sv.theorem1_bound(cls, 1.0, t) for t in (1e-2, 1e-5, 1e-9)]
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-5

    def test_requires_positive_level(self):
        cls = sv.SparsityClass(variant=1, q=0.0, s=1, m_bound=1, p=1)
        with pytest.raises(ValueError):
            sv.theorem1_bound(cls, 1.0, 0.0)


class TestDeterministicErrorBound:
    """Componentwise-error + thresholding controls every operator norm."""

    @pytest.mark.parametrize("q", [0.0, 0.5])
    def test_bound_holds_on_perturbed_class_members(self, q):
        rng = np.random.default_rng(77)
        for trial in range(12):
            model = random_stable_model(1000 + trial, d_max=7, p_max=3)
            coeffs = list(model.coeffs)
            budgets = sv.class_budgets(coeffs, q, 1)
            s_class = max(budgets["col_budget"], budgets["row_budget"], 1e-9)
            cls = sv.SparsityClass(variant=1, q=q, s=s_class, m_bound=1e9, p=len(coeffs))
            assert sv.class_membership(coeffs, cls).ok
            for _ in range(4):
                t_n = float(rng.uniform(0.005, 0.3))
                perturbed = [a + rng.uniform(-t_n, t_n, a.shape) for a in coeffs]
                for rule in (sv.soft_rule(), sv.adaptive_rule(4.0)):
                    thr = [sv.threshold_matrix(rule, t_n, b) for b in perturbed]
                    bound = sv.theorem1_bound(cls, rule.c_const, t_n)
                    sigma = np.eye(model.d)
                    comp_true = sv.companion(sv.VarModel(coeffs=tuple(coeffs), sigma_eps=sigma)).a_stack
                    comp_thr = sv.companion(sv.VarModel(coeffs=tuple(thr), sigma_eps=sigma)).a_stack
                    for kind in ("one", "inf"):
                        err = sv.matrix_norm(comp_true - comp_thr, kind)
                        assert err <= bound + 1e-9
