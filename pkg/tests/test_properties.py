import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from secretgame import (
    CappedParams,
    CostlyParams,
    ExplorationPlan,
    PartitionProfile,
    PickerMix,
    best_response,
    classify_regime,
    eval_costly_plan,
    prune,
    sample_dictionary,
    solve_capped,
    solve_sse,
    verify_ne,
)
from secretgame.capped import TOTAL_DEFEAT, top_k_mass
from secretgame.costly import BOUNDED, DETERRENCE
from secretgame.ingest import profile_from_histogram
from secretgame.model import eval_costly_plan_positional
from secretgame.oracle import (
    PerSecretMix,
    capped_best_dictionary,
    capped_identity_failures,
    costly_best_sequence,
    lp_check_small,
)

positive = st.floats(0.1, 10.0, allow_nan=False, allow_infinity=False)


@st.composite
def profiles(draw, max_partitions=5, max_size=6):
    n = draw(st.integers(1, max_partitions))
    sizes = draw(st.lists(st.integers(1, max_size), min_size=n, max_size=n))
    gaps = draw(st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n))
    start = draw(st.floats(0.0, 1.0))
    costs = list(np.cumsum([start] + gaps[1:]))
    return PartitionProfile(tuple(sizes), tuple(float(c) for c in costs))


@st.composite
def capped_games(draw, **kw):
    p = draw(profiles(**kw))
    assume(p.total >= 2)
    cap = draw(st.integers(1, p.total - 1))
    return p, CappedParams(draw(positive), draw(positive), cap)


@st.composite
def picker_mixes(draw, profile):
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=profile.n, max_size=profile.n))
    assume(sum(w) > 1e-3)
    return PickerMix(tuple(x / math.fsum(w) for x in w))


@st.composite
def per_secret(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    w = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n))
    assume(sum(w) > 0)
    return PerSecretMix(tuple(x / sum(w) for x in w))


@settings(max_examples=300, deadline=None)
@given(capped_games())
def test_capped_solution_is_equilibrium(game):
    p, params = game
    rep = solve_capped(p, params)
    assert verify_ne(p, params, rep.picker_strategy, rep.guesser_strategy, 1e-9).ok
    assert capped_identity_failures(p, params, rep) == []
    assert abs(rep.guesser_strategy.budget(p) - params.cap) <= 1e-9
    assert all(0 <= r <= 1 for r in rep.guesser_strategy.rho)


@settings(max_examples=200, deadline=None)
@given(capped_games(), positive)
def test_gamma_does_not_move_strategies(game, other_gamma):
    p, params = game
    a = solve_capped(p, params)
    b = solve_capped(p, CappedParams(params.lam, other_gamma, params.cap))
    assert a.picker_strategy == b.picker_strategy
    assert a.guesser_strategy == b.guesser_strategy
    assert a.picker_utility == b.picker_utility


@settings(max_examples=200, deadline=None)
@given(capped_games(), st.integers(0, 2 ** 32 - 1))
def test_sampler_draws_exactly_k(game, seed):
    p, params = game
    rep = solve_capped(p, params)
    d = sample_dictionary(rep.guesser_strategy, p, params.cap, seed)
    assert len(d) == len(set(d)) == params.cap


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_top_k_matches_enumeration(data):
    p = data.draw(profiles())
    assume(2 <= p.total <= 12)
    cap = data.draw(st.integers(1, p.total - 1))
    delta = data.draw(picker_mixes(p))
    closed, _ = top_k_mass(p, delta, cap)
    _, enum = capped_best_dictionary(PerSecretMix.from_picker_mix(p, delta), cap)
    assert closed == enum


@settings(max_examples=300, deadline=None)
@given(per_secret(), positive, positive)
def test_best_response_matches_enumeration(mix, gamma, sigma):
    params = CostlyParams(1.0, gamma, sigma)
    _, fast = best_response(mix.probs, params)
    _, slow = costly_best_sequence(mix, params)
    assert abs(fast - slow) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(st.data(), positive, positive)
def test_costly_expansions_agree(data, gamma, sigma):
    p = data.draw(profiles())
    delta = data.draw(picker_mixes(p))
    counts = [data.draw(st.integers(0, s)) for s in p.sizes]
    plan = ExplorationPlan(tuple(enumerate(counts)))
    params = CostlyParams(1.0, gamma, sigma)
    a = eval_costly_plan(p, params, delta, plan)
    b = eval_costly_plan_positional(p, params, delta, plan)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a), sigma * plan.length)


@settings(max_examples=200, deadline=None)
@given(profiles(), positive, positive, positive)
def test_commitment_never_below_maximin(p, lam, gamma, sigma):
    params = CostlyParams(lam, gamma, sigma)
    rep = solve_sse(p, params)
    assert rep.picker_utility >= -p.costs[0] - lam - 1e-9
    if rep.classification == DETERRENCE:
        q = np.array(rep.picker_strategy.mass) / np.array(p.sizes)
        assert np.all(np.diff(q) <= 1e-9)
        _, value = best_response(rep.picker_strategy, params, p)
        assert value <= 1e-9


@settings(max_examples=150, deadline=None)
@given(profiles(max_partitions=3), positive, positive, positive)
def test_commitment_matches_vertex_enumeration(p, lam, gamma, sigma):
    params = CostlyParams(lam, gamma, sigma)
    rep = solve_sse(p, params)
    assume(rep.classification == DETERRENCE)
    _, obj = lp_check_small(p, params)
    assert obj is not None and abs(obj - rep.picker_utility) <= 1e-7


@settings(max_examples=200, deadline=None)
@given(profiles(), positive, positive, positive)
def test_bounded_regime_bound(p, lam, gamma, sigma):
    r = classify_regime(p, CostlyParams(lam, gamma, sigma))
    if r.kind == BOUNDED:
        assert 1 <= r.M <= p.n and r.utility == -p.costs[r.M - 1]
        assert -p.costs[0] - lam <= r.utility <= -p.costs[0]


@settings(max_examples=200, deadline=None)
@given(profiles(), st.floats(0.0, 0.5))
def test_prune_output_is_valid(p, tol):
    q = prune(p, tol)
    assert q.total == p.total
    assert all(b - a >= tol for a, b in zip(q.costs, q.costs[1:])) or tol == 0
    assert PartitionProfile.from_json(q.to_json()) == q


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6), min_size=1, max_size=30))
def test_histogram_profile_valid(hist):
    p = profile_from_histogram(hist)
    assert p.total == sum(hist.values())
    assert p.costs[-1] == 1.0
    assert PartitionProfile.from_json(p.to_json()) == p


@settings(max_examples=200, deadline=None)
@given(profiles())
def test_profile_json_round_trip(p):
    assert PartitionProfile.from_json(p.to_json()) == p


@settings(max_examples=100, deadline=None)
@given(capped_games())
def test_total_defeat_utility(game):
    p, params = game
    rep = solve_capped(p, params)
    if rep.classification == TOTAL_DEFEAT:
        assert rep.picker_utility == -p.costs[0] - params.lam
        assert rep.guesser_strategy.rho[0] == 1.0
