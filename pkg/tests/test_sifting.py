import numpy as np
import pytest

from onlinelp.instances import MkpParams, generate_mkp
from onlinelp.model import LpInstance
from onlinelp.online import RunConfig, run_duplicated, run_pass
from onlinelp.sifting import (
    SiftConfig,
    basis_metrics,
    init_working_set,
    price,
    sift,
    stabilize,
)
from onlinelp.simplex import enumerate_vertices_oracle, solve_lp


class TestInitWorkingSet:
    def test_threshold_selection(self):
        w = init_working_set([1.0, 0.0, 0.5], 0.5, fallback_count=2)
        np.testing.assert_array_equal(w, [0, 2])

    def test_empty_falls_back_to_top_m(self):
        w = init_working_set([0.0, 0.0, 0.0], 0.5, fallback_count=2)
        np.testing.assert_array_equal(w, [0, 1])

    def test_fallback_picks_largest_scores(self):
        w = init_working_set([0.1, 0.4, 0.2, 0.4], 1.5, fallback_count=2)
        np.testing.assert_array_equal(w, [1, 3])


class TestPrice:
    def test_exact_dual_prices_nothing(self):
        inst = generate_mkp(MkpParams(m=4, n=50, tightness=0.3, seed=0))
        res = solve_lp(inst)
        got = price(inst, np.arange(50), res.y_star, tol=1e-7)
        assert got.size == 0
        # even outside the working set: the exact dual is globally feasible
        got = price(inst, np.arange(0), res.y_star, tol=1e-6)
        assert got.size == 0

    def test_zero_dual_prices_positive_costs(self):
        inst = LpInstance.from_dense([[1.0, 1.0, 1.0]], [1.0],
                                     [2.0, -1.0, 0.5])
        got = price(inst, [0], np.zeros(1), tol=1e-7)
        np.testing.assert_array_equal(got, [2])

    def test_matches_dense_reference(self):
        rng = np.random.default_rng(9)
        inst = generate_mkp(MkpParams(m=6, n=80, tightness=0.2, density=0.5, seed=1))
        y = rng.random(6) * 3
        working = set(rng.choice(80, size=20, replace=False).tolist())
        got = price(inst, working, y, tol=1e-7)
        reduced = inst.obj - inst.to_dense().T @ y
        expected = np.array(sorted(j for j in range(80)
                                   if j not in working and reduced[j] > 1e-7))
        np.testing.assert_array_equal(got, expected)

    def test_truncation_keeps_most_violated(self):
        inst = LpInstance.from_dense([[1.0, 1.0, 1.0]], [1.0], [3.0, 1.0, 2.0])
        got = price(inst, [], np.zeros(1), tol=1e-7, max_new=2)
        np.testing.assert_array_equal(got, [0, 2])


class TestStabilize:
    def test_alpha_one_identity(self):
        y = np.array([1.0, 2.0])
        np.testing.assert_array_equal(stabilize(y, np.zeros(2), 1.0), y)

    def test_paper_blend(self):
        out = stabilize([1.0, 0.0], [0.0, 1.0], 0.4)
        np.testing.assert_allclose(out, [0.4, 0.6])

    def test_anchor_equal_identity(self):
        y = np.array([0.3, 0.7])
        np.testing.assert_allclose(stabilize(y, y, 0.123), y)


class TestBasisMetrics:
    def test_full_overlap(self):
        acc, rdc = basis_metrics({1, 2, 3}, {1, 2, 3}, 10)
        assert acc == 1.0 and rdc == 0.3

    def test_disjoint(self):
        acc, _ = basis_metrics({1, 2}, {3, 4}, 10)
        assert acc == 0.0

    def test_ledger_style_ratios(self):
        basis = set(range(301))
        working = set(range(271)) | set(range(1000, 1000 + 11862 - 271))
        acc, rdc = basis_metrics(basis, working, 62171)
        assert acc == pytest.approx(271 / 301)
        assert rdc == pytest.approx(11862 / 62171)

    def test_empty_basis_rejected(self):
        with pytest.raises(ValueError):
            basis_metrics(set(), {1}, 10)


def online_then_sift(inst, sift_config=None, seed=0, k=2):
    sol = run_duplicated(inst, RunConfig(method="explicit", seed=seed,
                                         duplication=k, start="ones"))
    return sift(inst, sol, sift_config)


class TestSift:
    def test_tiny_matches_oracle(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            m, n = int(rng.integers(1, 4)), int(rng.integers(2, 7))
            A = rng.random((m, n)) * 2
            b = rng.random(m) * n * 0.3 + 0.1
            c = rng.random(n) * 2
            inst = LpInstance.from_dense(A, b, c)
            result = online_then_sift(inst, seed=trial)
            opt, _ = enumerate_vertices_oracle(inst)
            assert result.objective == pytest.approx(opt, abs=1e-8)

    def test_superset_seed_terminates_first_round(self):
        inst = generate_mkp(MkpParams(m=4, n=60, tightness=0.3, seed=5))
        full = solve_lp(inst)
        support = np.flatnonzero(full.x_star > 1e-9)
        fake = run_pass(inst, RunConfig(seed=0))
        x_fake = np.zeros(60)
        x_fake[support] = 1.0
        fake = type(fake)(x_hat=x_fake, y_final=full.y_star,
                          objective=full.obj, violation=0.0,
                          max_dual_norm=0.0, elapsed_columns=60)
        result = sift(inst, fake, SiftConfig(init_threshold=0.5))
        assert result.rounds == 1
        assert result.objective == pytest.approx(full.obj, rel=1e-9)

    def test_matches_direct_solve_and_certificate(self):
        for seed in range(4):
            inst = generate_mkp(MkpParams(m=6, n=300, tightness=0.15, seed=seed))
            result = online_then_sift(inst, seed=seed)
            direct = solve_lp(inst)
            assert result.objective == pytest.approx(
                direct.obj, rel=1e-6, abs=1e-9)
            # global certificate: nothing prices in against the exact dual
            leftover = price(inst, result.final_working_set, result.y, 1e-7)
            assert leftover.size == 0
            # full-length primal is feasible
            viol = inst.to_scipy() @ result.x - inst.rhs
            assert float(np.max(viol)) <= 1e-7 * (1 + float(np.max(inst.rhs)))

    def test_monotone_working_objective(self):
        inst = generate_mkp(MkpParams(m=8, n=400, tightness=0.1, seed=2))
        result = online_then_sift(inst, seed=2)
        objs = [r.objective for r in result.trace]
        assert all(b >= a - 1e-9 for a, b in zip(objs, objs[1:]))

    def test_alpha_one_trace_matches_no_anchor(self):
        inst = generate_mkp(MkpParams(m=6, n=200, tightness=0.2, seed=7))
        r1 = online_then_sift(inst, SiftConfig(stabilization_alpha=1.0), seed=7)
        r2 = online_then_sift(inst, SiftConfig(use_online_anchor=False), seed=7)
        assert [t.working_size for t in r1.trace] == [t.working_size for t in r2.trace]
        assert [t.priced for t in r1.trace] == [t.priced for t in r2.trace]
        assert r1.objective == r2.objective

    def test_acc_rdc_reported(self):
        inst = generate_mkp(MkpParams(m=5, n=150, tightness=0.25, seed=9))
        result = online_then_sift(inst, seed=9)
        assert result.acc is not None and 0.0 <= result.acc <= 1.0
        assert 0.0 < result.rdc <= 1.0

    def test_rejects_negative_rhs(self):
        inst = LpInstance.from_dense([[-1.0]], [-1.0], [1.0])
        fake_sol = run_pass(
            LpInstance.from_dense([[1.0]], [1.0], [1.0]), RunConfig(seed=0))
        with pytest.raises(ValueError, match="b >= 0"):
            sift(inst, fake_sol)
