import json
import math

import numpy as np
import pytest

from secretgame import (
    CappedParams,
    CostlyParams,
    ExplorationPlan,
    GameSpecError,
    GuesserMarginals,
    PartitionProfile,
    PickerMix,
    eval_capped,
    eval_costly_plan,
    exhaust_utility,
)
from secretgame.model import QUIT, eval_costly_plan_positional
from secretgame.oracle import random_costly_instance, random_profile


class TestPartitionProfile:
    def test_rejects_empty(self):
        with pytest.raises(GameSpecError):
            PartitionProfile((), ())

    @pytest.mark.parametrize("sizes,costs,where", [
        ((1, 2), (0.0, 0.0), "partition 1"),
        ((1, 2), (1.0, 0.5), "partition 1"),
        ((0, 2), (0.0, 1.0), "partition 0"),
        ((1, 2), (-1.0, 1.0), "partition 0"),
        ((1, 2), (0.0, math.inf), "partition 1"),
    ])
    def test_invalid_partitions_name_index(self, sizes, costs, where):
        with pytest.raises(GameSpecError, match=where):
            PartitionProfile(sizes, costs)

    def test_length_mismatch(self):
        with pytest.raises(GameSpecError):
            PartitionProfile((1, 2), (0.0,))

    def test_huge_sizes_stay_exact(self):
        p = PartitionProfile((2 ** 64, 2 ** 64), (0.0, 1.0))
        assert p.total == 2 ** 65

    def test_json_round_trip(self):
        p = PartitionProfile((3, 5, 7), (0.0, 0.25, 1.0))
        assert PartitionProfile.from_json(p.to_json()) == p

    @pytest.mark.parametrize("text,msg", [
        ("not json", "invalid JSON"),
        ("[]", "partitions"),
        ('{"partitions": []}', "non-empty"),
        ('{"partitions": [{"size": 1}]}', "partition 0"),
        ('{"partitions": [{"size": 1.5, "cost": 0}]}', "partition 0"),
        ('{"partitions": [{"size": 1, "cost": 0}, {"size": 1, "cost": 0}]}', "partition 1"),
        ('{"partitions": [{"size": true, "cost": 0}]}', "partition 0"),
    ])
    def test_parser_rejects(self, text, msg):
        with pytest.raises(GameSpecError, match=msg):
            PartitionProfile.from_json(text)

    def test_offsets_and_lookup(self):
        p = PartitionProfile((2, 3), (0.0, 1.0))
        assert p.offsets() == [0, 2]
        assert [p.partition_of(i) for i in range(5)] == [0, 0, 1, 1, 1]
        with pytest.raises(IndexError):
            p.partition_of(5)


class TestParams:
    @pytest.mark.parametrize("lam,gamma,cap", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1.5), (1, 1, True)])
    def test_capped_rejects(self, lam, gamma, cap):
        with pytest.raises(GameSpecError):
            CappedParams(lam, gamma, cap)

    def test_cap_below_total(self, example_a):
        with pytest.raises(GameSpecError, match="K=6"):
            CappedParams(1, 1, 6).check(example_a)
        CappedParams(1, 1, 5).check(example_a)

    @pytest.mark.parametrize("field", ["lam", "gamma", "sigma"])
    def test_costly_rejects(self, field):
        args = {"lam": 1.0, "gamma": 1.0, "sigma": 1.0, field: 0.0}
        with pytest.raises(GameSpecError, match=field):
            CostlyParams(**args)


class TestStrategies:
    def test_picker_mix_sum(self):
        with pytest.raises(GameSpecError):
            PickerMix((0.5, 0.4))
        with pytest.raises(GameSpecError):
            PickerMix((1.5, -0.5))

    def test_uniform_prefix(self, example_a):
        assert PickerMix.uniform_prefix(example_a, 2).mass == (0.5, 0.5)
        assert PickerMix.cheapest(example_a).mass == (1.0, 0.0)

    def test_marginals_bounded(self):
        with pytest.raises(GameSpecError):
            GuesserMarginals((1.1,))
        with pytest.raises(GameSpecError):
            GuesserMarginals((-0.1,))

    def test_budget_check(self, example_a):
        rho = GuesserMarginals((0.5, 1 / 6))
        rho.check_budget(example_a, 2)
        with pytest.raises(GameSpecError):
            rho.check_budget(example_a, 3)

    def test_plan_validation(self, example_a):
        ExplorationPlan(((0, 3), (1, 2))).validate(example_a)
        with pytest.raises(GameSpecError):
            ExplorationPlan(((0, 4),)).validate(example_a)
        with pytest.raises(GameSpecError):
            ExplorationPlan(((2, 1),)).validate(example_a)
        assert QUIT.is_quit and QUIT.length == 0


class TestEvalCapped:
    def test_example_a(self, example_a):
        u_d, u_a = eval_capped(example_a, CappedParams(3, 1, 2), PickerMix((0.5, 0.5)),
                               GuesserMarginals((0.5, 1 / 6)))
        assert u_d == pytest.approx(-1.5, abs=1e-12)
        assert u_a == pytest.approx(1 / 3, abs=1e-12)

    def test_no_guesses(self):
        p = PartitionProfile((2, 3, 4), (0.1, 0.4, 0.9))
        nu = (0.2, 0.3, 0.5)
        u_d, u_a = eval_capped(p, CappedParams(5, 2, 1), PickerMix(nu), GuesserMarginals((0, 0, 0)))
        assert u_d == pytest.approx(-(0.02 + 0.12 + 0.45), abs=1e-12)
        assert u_a == 0.0

    def test_single_partition(self):
        p = PartitionProfile((8,), (0.7,))
        u_d, _ = eval_capped(p, CappedParams(4, 1, 3), PickerMix((1.0,)), GuesserMarginals((3 / 8,)))
        assert u_d == pytest.approx(-0.7 - 4 * 3 / 8, abs=1e-12)

    def test_affine_coupling(self):
        # for fixed delta, u_A = (gamma/lam) * (-usability - u_D)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            p = random_profile(rng)
            lam, gamma = rng.uniform(0.1, 10, 2)
            delta = PickerMix(tuple(rng.dirichlet(np.ones(p.n))))
            rho = GuesserMarginals(tuple(rng.random(p.n)))
            params = CappedParams(lam, gamma, 1)
            u_d, u_a = eval_capped(p, params, delta, rho)
            usability = math.fsum(c * m for c, m in zip(p.costs, delta.mass))
            assert u_a == pytest.approx(-gamma / lam * (u_d + usability), abs=1e-9)


class TestEvalCostly:
    def test_exhaust_three(self):
        p = PartitionProfile((3,), (0.0,))
        assert eval_costly_plan(p, CostlyParams(1, 5, 2), PickerMix((1.0,)), ExplorationPlan.full(p)) == \
            pytest.approx(1.0, abs=1e-12)

    def test_quit_is_zero(self, example_d):
        assert eval_costly_plan(example_d, CostlyParams(1, 5, 2), PickerMix((0.3, 0.7)), QUIT) == 0.0

    def test_descending_singletons(self):
        p = PartitionProfile((1, 1, 1), (0.0, 0.5, 1.0))
        plan = ExplorationPlan(((0, 1), (1, 1), (2, 1)))
        assert eval_costly_plan(p, CostlyParams(1, 2, 1), PickerMix((0.5, 0.3, 0.2)), plan) == \
            pytest.approx(0.3, abs=1e-12)

    @pytest.mark.parametrize("size,gamma,sigma,expected", [(3, 5, 2, 1.0), (1, 1, 1, 0.0), (5, 2, 1, -1.0)])
    def test_exhaust_utility(self, size, gamma, sigma, expected):
        assert exhaust_utility(size, CostlyParams(1, gamma, sigma)) == expected

    def test_exhaust_utility_matches_plan(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 50))
            params = CostlyParams(1.0, float(rng.uniform(0.1, 10)), float(rng.uniform(0.1, 10)))
            p = PartitionProfile((n,), (0.0,))
            v = eval_costly_plan(p, params, PickerMix((1.0,)), ExplorationPlan.full(p))
            assert v == pytest.approx(exhaust_utility(n, params), abs=1e-12 * max(1, abs(v)))

    def test_two_expansions_agree(self):
        rng = np.random.default_rng(2)
        for _ in range(500):
            p, params = random_costly_instance(rng)
            delta = PickerMix(tuple(rng.dirichlet(np.ones(p.n))))
            batches, used = [], [0] * p.n
            for _ in range(int(rng.integers(0, 6))):
                g = int(rng.integers(p.n))
                c = int(rng.integers(0, p.sizes[g] - used[g] + 1))
                used[g] += c
                batches.append((g, c))
            plan = ExplorationPlan(tuple(batches))
            a = eval_costly_plan(p, params, delta, plan)
            b = eval_costly_plan_positional(p, params, delta, plan)
            assert a == pytest.approx(b, abs=1e-12 * max(1.0, abs(a), params.sigma * plan.length))


def test_report_round_trip(example_a):
    mix = PickerMix((0.5, 0.5))
    again = PickerMix(tuple(json.loads(json.dumps(list(mix.mass)))))
    assert again == mix
