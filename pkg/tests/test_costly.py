import numpy as np
import pytest

from secretgame import (
    CostlyParams,
    ExplorationPlan,
    PartitionProfile,
    PickerMix,
    best_response,
    build_sse_lp,
    classify_regime,
    eval_costly_plan,
    solve_costly_ne,
    solve_sse,
)
from secretgame import costly
from secretgame.costly import BOUNDED, CHEAPEST_PICK, DETERRENCE, GUESSER_QUITS, TOTAL_DEFEAT
from secretgame.oracle import lp_check_small, random_costly_instance, random_profile


class TestRegime:
    def test_guesser_quits(self, example_d):
        r = classify_regime(example_d, CostlyParams(1, 0.5, 1))
        assert r.kind == GUESSER_QUITS and r.utility == -0.0

    def test_total_defeat(self):
        r = classify_regime(PartitionProfile((2, 2), (0.0, 1.0)), CostlyParams(5, 10, 1))
        assert r.kind == TOTAL_DEFEAT and r.utility == -5.0

    def test_bounded(self):
        r = classify_regime(PartitionProfile((2, 10), (0.0, 1.0)), CostlyParams(5, 3, 1))
        assert r.kind == BOUNDED and r.M == 2 and r.utility == -1.0

    def test_boundaries_flagged(self):
        r = classify_regime(PartitionProfile((3,), (0.0,)), CostlyParams(1, 1, 1))
        assert r.kind == GUESSER_QUITS and r.boundary
        r = classify_regime(PartitionProfile((3,), (0.0,)), CostlyParams(1, 2, 1))
        assert r.kind == TOTAL_DEFEAT and r.boundary

    def test_m_definition(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            p, params = random_costly_instance(rng)
            r = classify_regime(p, params)
            if r.kind != BOUNDED:
                assert r.M is None
                continue
            g, s, lam, c1 = params.gamma, params.sigma, params.lam, p.costs[0]
            expected = min(i + 1 for i in range(p.n) if g < (p.sizes[i] + 1) * s / 2 and p.costs[i] <= c1 + lam)
            assert r.M == expected and r.utility == -p.costs[r.M - 1]

    def test_ne_report(self):
        rep = solve_costly_ne(PartitionProfile((2, 10), (0.0, 1.0)), CostlyParams(5, 3, 1))
        assert rep.classification == BOUNDED and rep.picker_strategy is None
        assert rep.diagnostics["utility_upper_bound"] == -1.0


class TestBestResponse:
    def test_descending_full(self):
        plan, value = best_response((0.5, 0.3, 0.2), CostlyParams(1, 2, 1))
        assert plan.batches == ((0, 1), (1, 1), (2, 1))
        assert value == pytest.approx(0.3, abs=1e-12)

    def test_uniform_five_quits(self):
        plan, value = best_response([0.2] * 5, CostlyParams(1, 2, 1))
        assert plan.is_quit and value == 0.0

    def test_degenerate_single_guess(self):
        plan, value = best_response((0.0, 1.0, 0.0), CostlyParams(1, 2, 1))
        assert plan.batches == ((1, 1),) and value == 1.0

    def test_profile_form(self, example_d):
        delta = PickerMix((0.8, 0.2))
        plan, value = best_response(delta, CostlyParams(10, 2, 1), example_d)
        assert plan.is_quit

    def test_value_matches_plan_evaluation(self):
        rng = np.random.default_rng(6)
        for _ in range(300):
            p, params = random_costly_instance(rng)
            delta = PickerMix(tuple(rng.dirichlet(np.ones(p.n))))
            plan, value = best_response(delta, params, p)
            assert value == pytest.approx(eval_costly_plan(p, params, delta, plan), abs=1e-9)

    def test_needs_profile(self):
        with pytest.raises(TypeError):
            best_response(PickerMix((1.0,)), CostlyParams(1, 1, 1))


class TestLP:
    def test_example_rows_agree_on_simplex(self, example_d):
        lp = build_sse_lp(example_d, CostlyParams(10, 2, 1))
        A, b = lp.deterrence_rows
        for nu1 in np.linspace(0, 1, 11):
            nu = np.array([nu1, 1 - nu1])
            assert A[0] @ nu - b[0] == pytest.approx(2.5 * nu[0] - 2, abs=1e-12)
            assert A[1] @ nu - b[1] == pytest.approx(4.5 * nu[0] + 1.5 * nu[1] - 4, abs=1e-12)

    def test_single_partition_row(self):
        p = PartitionProfile((5,), (0.0,))
        lp = build_sse_lp(p, CostlyParams(1, 2, 1))
        A, b = lp.deterrence_rows
        assert A[0, 0] - b[0] == pytest.approx(2 - 3, abs=1e-12)

    def test_rows_are_plan_utilities(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p, params = random_costly_instance(rng)
            lp = build_sse_lp(p, params)
            A, b = lp.deterrence_rows
            delta = PickerMix(tuple(rng.dirichlet(np.ones(p.n))))
            nu = np.array(delta.mass)
            for k in range(p.n):
                v = eval_costly_plan(p, params, delta, ExplorationPlan.full(p, k + 1))
                assert A[k] @ nu - b[k] == pytest.approx(v, abs=1e-9 * max(1, params.sigma * p.total))

    def test_weak_guesser_makes_cheapest_feasible(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            p = random_profile(rng)
            params = CostlyParams(1.0, 0.5, 1.0)
            A, b = build_sse_lp(p, params).deterrence_rows
            nu = np.zeros(p.n)
            nu[0] = 1.0
            assert np.all(A @ nu - b <= 1e-12)


class TestSSE:
    def test_example_d(self, example_d):
        rep = solve_sse(example_d, CostlyParams(10, 2, 1))
        assert rep.classification == DETERRENCE
        assert rep.picker_strategy.mass == pytest.approx((0.8, 0.2), abs=1e-9)
        assert rep.picker_utility == pytest.approx(-0.2, abs=1e-9)
        assert rep.picker_strategy.per_secret(example_d) == pytest.approx((0.4, 0.05), abs=1e-9)
        assert rep.guesser_strategy.is_quit

    def test_single_class_deters(self):
        rep = solve_sse(PartitionProfile((5,), (0.0,)), CostlyParams(1, 2, 1))
        assert rep.classification == DETERRENCE and rep.picker_utility == 0.0

    def test_uniform_cannot_deter(self):
        rep = solve_sse(PartitionProfile((2,), (0.0,)), CostlyParams(1, 10, 1))
        assert rep.classification == CHEAPEST_PICK and rep.picker_utility == -1.0

    def test_weak_guesser(self, example_d):
        rep = solve_sse(example_d, CostlyParams(1, 0.5, 1))
        assert rep.classification == GUESSER_QUITS and rep.picker_utility == -0.0

    def test_random_against_vertex_enumeration(self):
        rng = np.random.default_rng(9)
        checked = 0
        for _ in range(300):
            p, params = random_costly_instance(rng, max_partitions=3)
            rep = solve_sse(p, params)
            assert rep.picker_utility >= -p.costs[0] - params.lam - 1e-9
            if rep.classification != DETERRENCE:
                continue
            checked += 1
            _, obj = lp_check_small(p, params)
            assert rep.picker_utility == pytest.approx(obj, abs=1e-7)
            nu = np.array(rep.picker_strategy.mass)
            q = nu / np.array(p.sizes)
            assert np.all(np.diff(q) <= 1e-9)
            _, value = best_response(rep.picker_strategy, params, p)
            assert value <= 1e-9
        assert checked > 20

    def test_beats_uniform_when_feasible(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            p, params = random_costly_instance(rng)
            if params.gamma > (p.total + 1) * params.sigma / 2 or params.gamma < params.sigma:
                continue
            rep = solve_sse(p, params)
            uniform = -sum(c * s for c, s in zip(p.costs, p.sizes)) / p.total
            assert rep.picker_utility >= uniform - 1e-9

    def test_uniform_minimizes_guesser_value(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p, params = random_costly_instance(rng)
            uniform = PickerMix(tuple(s / p.total for s in p.sizes))
            _, u_val = best_response(uniform, params, p)
            for _ in range(200):
                delta = PickerMix(tuple(rng.dirichlet(np.ones(p.n))))
                assert u_val <= best_response(delta, params, p)[1] + 1e-9

    def test_boundary_uniform_exactly_zero(self):
        # (|P|+1) sigma / 2 == gamma: uniform is feasible with value 0
        rep = solve_sse(PartitionProfile((1, 2), (0.0, 0.5)), CostlyParams(10, 2, 1))
        assert "(|P|+1)*sigma/2 == gamma" in rep.diagnostics["boundary"]
        assert rep.classification == DETERRENCE

    def test_lp_feasibility_safeguard(self, example_d):
        lp = build_sse_lp(example_d, CostlyParams(10, 2, 1))
        A, b = lp.deterrence_rows
        bad = np.array([1.0, 0.0])
        nu, w = costly._restore_feasibility(example_d, A, b, bad)
        assert 0 < w < 1
        assert np.all(A @ nu - b <= 0)
        assert np.all(np.diff(nu / np.array(example_d.sizes)) <= 1e-12)
