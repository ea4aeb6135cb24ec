import numpy as np
import pytest

from onlinelp.instances import MkpParams, generate_mkp
from onlinelp.model import LpInstance
from onlinelp.simplex import (
    SolveStatus,
    enumerate_vertices_oracle,
    solve_lp,
)


def random_instance(rng, m, n, allow_negative=False):
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.8)
    b = rng.random(m) * 2 + 0.2
    if allow_negative:
        b -= 0.5
    c = rng.normal(size=n)
    u = rng.random(n) * 2 + 0.2
    return LpInstance.from_dense(A, b, c, upper=u)


class TestSolveLp:
    def test_toy_half(self):
        inst = LpInstance.from_dense([[1.0, 1.0]], [0.5], [1.0, 1.0])
        res = solve_lp(inst)
        assert res.status is SolveStatus.OPTIMAL
        assert res.obj == pytest.approx(0.5, abs=1e-10)
        assert len(res.basis) == 1

    def test_nonpositive_costs_origin_optimal(self):
        inst = LpInstance.from_dense([[1.0, 2.0], [2.0, 1.0]], [3.0, 3.0],
                                     [-1.0, 0.0])
        res = solve_lp(inst)
        assert res.status is SolveStatus.OPTIMAL
        assert res.obj == 0.0
        np.testing.assert_allclose(res.x_star, 0.0, atol=1e-12)

    def test_upper_bound_active(self):
        inst = LpInstance.from_dense([[1.0]], [10.0], [1.0], upper=[2.0])
        res = solve_lp(inst)
        assert res.obj == pytest.approx(2.0, abs=1e-10)
        assert res.x_star[0] == pytest.approx(2.0)

    def test_negative_rhs_phase1(self):
        # -x <= -1 forces x >= 1
        inst = LpInstance.from_dense([[-1.0]], [-1.0], [-1.0], upper=[5.0])
        res = solve_lp(inst)
        assert res.status is SolveStatus.OPTIMAL
        assert res.x_star[0] == pytest.approx(1.0, abs=1e-9)
        assert res.obj == pytest.approx(-1.0, abs=1e-9)

    def test_infeasible_detected(self):
        # x <= 1 and -x <= -3 cannot both hold with u = 2
        inst = LpInstance.from_dense([[1.0], [-1.0]], [1.0, -3.0], [1.0],
                                     upper=[2.0])
        res = solve_lp(inst)
        assert res.status is SolveStatus.INFEASIBLE

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(17)
        for trial in range(50):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 7))
            if m + n > 12:
                continue
            inst = random_instance(rng, m, n)
            res = solve_lp(inst)
            assert res.status is SolveStatus.OPTIMAL
            opt, _ = enumerate_vertices_oracle(inst)
            assert res.obj == pytest.approx(opt, abs=1e-8)

    def test_feasibility_and_duality_invariants(self):
        rng = np.random.default_rng(23)
        for trial in range(25):
            inst = random_instance(rng, int(rng.integers(1, 6)),
                                   int(rng.integers(1, 6)))
            res = solve_lp(inst)
            assert res.status is SolveStatus.OPTIMAL
            x, y = res.x_star, res.y_star
            scale = 1.0 + float(np.abs(inst.rhs).max())
            assert np.all(inst.to_dense() @ x <= inst.rhs + 1e-7 * scale)
            assert np.all(x >= -1e-9) and np.all(x <= inst.upper + 1e-9)
            assert np.all(y >= -1e-7)
            # strong duality against the box-penalized dual bound
            reduced = inst.obj - inst.to_dense().T @ y
            dual = float(inst.rhs @ y) + float(inst.upper @ np.maximum(reduced, 0.0))
            assert abs(res.obj - dual) <= 1e-6 * (1 + abs(res.obj))

    def test_warm_start_from_optimum_takes_zero_pivots(self):
        rng = np.random.default_rng(31)
        inst = random_instance(rng, 4, 5)
        first = solve_lp(inst)
        again = solve_lp(inst, warm_basis=first)
        assert again.status is SolveStatus.OPTIMAL
        assert again.iterations == 0
        assert again.obj == pytest.approx(first.obj, abs=1e-10)

    def test_objective_monotone_under_column_growth(self):
        rng = np.random.default_rng(41)
        inst = random_instance(rng, 4, 8)
        cols = rng.permutation(8)
        prev = -np.inf
        for k in (2, 4, 6, 8):
            sub = inst.restrict_columns(np.sort(cols[:k]))
            res = solve_lp(sub)
            assert res.status is SolveStatus.OPTIMAL
            assert res.obj >= prev - 1e-9
            prev = res.obj

    def test_iteration_limit_status(self):
        inst = generate_mkp(MkpParams(m=6, n=60, tightness=0.3, seed=1))
        res = solve_lp(inst, max_iter=1)
        assert res.status is SolveStatus.ITERATION_LIMIT

    def test_mkp_solves(self):
        inst = generate_mkp(MkpParams(m=8, n=200, tightness=0.25, seed=3))
        res = solve_lp(inst)
        assert res.status is SolveStatus.OPTIMAL
        assert res.obj > 0
        assert len(res.basis) == 8

    def test_degenerate_instances_terminate_and_match_oracle(self):
        # small integer data breeds ties and degenerate pivots, forcing the
        # stall detector and Bland's rule to earn their keep
        rng = np.random.default_rng(77)
        for trial in range(30):
            m = int(rng.integers(2, 6))
            n = int(rng.integers(2, 7))
            if m + n > 11:
                continue
            A = rng.integers(0, 3, size=(m, n)).astype(float)
            b = rng.integers(0, 3, size=m).astype(float)
            c = rng.integers(-2, 3, size=n).astype(float)
            if not np.any(A):
                continue
            inst = LpInstance.from_dense(A, b, c)
            res = solve_lp(inst)
            assert res.status is SolveStatus.OPTIMAL
            opt, _ = enumerate_vertices_oracle(inst)
            assert res.obj == pytest.approx(opt, abs=1e-8)


class TestVertexOracle:
    def test_toy_half(self):
        inst = LpInstance.from_dense([[1.0, 1.0]], [0.5], [1.0, 1.0])
        opt, x = enumerate_vertices_oracle(inst)
        assert opt == pytest.approx(0.5, abs=1e-12)
        assert x.sum() == pytest.approx(0.5, abs=1e-12)

    def test_box_only_via_vacuous_row(self):
        # a zero row with b >= 0 never binds, leaving a pure box problem
        inst = LpInstance(1, 2, [0, 0, 0], [], [], [1.0], [2.0, -1.0], [1.5, 1.0])
        opt, x = enumerate_vertices_oracle(inst)
        assert opt == pytest.approx(2.0 * 1.5)
        np.testing.assert_allclose(x, [1.5, 0.0], atol=1e-12)

    def test_origin_is_candidate(self):
        rng = np.random.default_rng(2)
        inst = random_instance(rng, 3, 3)
        opt, _ = enumerate_vertices_oracle(inst)
        assert opt >= 0.0 - 1e-12 or np.all(inst.obj <= 0)

    def test_size_guard(self):
        inst = generate_mkp(MkpParams(m=8, n=20, tightness=0.5, seed=0))
        with pytest.raises(ValueError, match="oracle"):
            enumerate_vertices_oracle(inst)
