import numpy as np
import pytest

import sparsevar as sv
from sparsevar.lp import LpProblem, lp_solve
from sparsevar.verify import vertex_optimum


class TestLpSolve:
    def test_simple_lower_bound(self):
        sol = lp_solve(LpProblem(c=[1.0, 1.0], g_mat=[[-1.0, 0.0]], h=[-1.0]))
        assert np.allclose(sol.x, [1.0, 0.0])
        assert sol.objective == pytest.approx(1.0, abs=1e-12)

    def test_infeasible(self):
        with pytest.raises(sv.InfeasibleError):
            lp_solve(LpProblem(c=[1.0], g_mat=[[1.0]], h=[-1.0]))

    def test_unbounded(self):
        with pytest.raises(sv.UnboundedError):
            lp_solve(LpProblem(c=[-1.0], g_mat=[[0.0]], h=[1.0]))

    def test_no_constraints(self):
        sol = lp_solve(LpProblem(c=[2.0, 0.0], g_mat=np.zeros((0, 2)), h=[]))
        assert np.array_equal(sol.x, [0.0, 0.0])

    def test_degenerate_problem_terminates(self):
        # classic cycling example (Beale); Bland fallback must terminate
        c = [-0.75, 150.0, -0.02, 6.0]
        g = [
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
        h = [0.0, 0.0, 1.0]
        sol = lp_solve(LpProblem(c=c, g_mat=g, h=h))
        assert sol.objective == pytest.approx(-0.05, abs=1e-9)

    def test_pivot_limit(self):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((12, 8))
        problem = LpProblem(c=-np.ones(8), g_mat=np.vstack([g, np.ones(8)]), h=np.r_[np.ones(12), 5.0])
        with pytest.raises(sv.PivotLimitError) as exc_info:
            lp_solve(problem, max_pivots=1)
        assert exc_info.value.pivots == 1

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            LpProblem(c=[1.0, 2.0], g_mat=[[1.0]], h=[1.0])

    def test_random_problems_match_vertex_enumeration(self):
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(120):
            n = int(rng.integers(2, 7))
            m = int(rng.integers(1, 8))
            g = np.vstack([rng.standard_normal((m, n)), np.ones(n)])
            h = np.concatenate([rng.standard_normal(m) + 0.5, [8.0]])
            problem = LpProblem(c=rng.standard_normal(n), g_mat=g, h=h)
            oracle = vertex_optimum(problem)
            if oracle is None:
                with pytest.raises(sv.InfeasibleError):
                    lp_solve(problem)
            else:
                sol = lp_solve(problem)
                assert sol.objective == pytest.approx(oracle, abs=1e-8)
                assert np.all(problem.g_mat @ sol.x <= problem.h + 1e-9)
                assert np.all(sol.x >= 0)
            checked += 1
        assert checked == 120

    def test_equality_like_constraints(self):
        # x1 + x2 <= 1 and x1 + x2 >= 1 pin the simplex face
        problem = LpProblem(
            c=[1.0, 2.0],
            g_mat=[[1.0, 1.0], [-1.0, -1.0]],
            h=[1.0, -1.0],
        )
        sol = lp_solve(problem)
        assert np.allclose(sol.x, [1.0, 0.0])
        assert sol.objective == pytest.approx(1.0, abs=1e-12)
