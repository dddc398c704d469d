"""Brute-force checks for the analytic solvers on small instances.

Everything here works per secret, with no symmetry assumption inside a
partition, and enumerates the guesser's pure strategies outright.  The
size guards are hard errors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import capped, costly
from .model import (
    IDENTITY_TOL,
    PROB_TOL,
    CappedParams,
    CostlyParams,
    ExplorationPlan,
    GameSpecError,
    GuesserMarginals,
    PartitionProfile,
    PickerMix,
    eval_costly_plan,
)

MAX_DICTIONARY_SECRETS = 20
MAX_SEQUENCE_SECRETS = 7
MAX_NE_SECRETS = 12
MAX_LP_PARTITIONS = 3


class OracleSizeError(GameSpecError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class PerSecretMix:
    """Arbitrary picking distribution over individual secrets."""

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise GameSpecError("distribution over no secrets")
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise GameSpecError("per-secret probabilities must be non-negative")
        if abs(math.fsum(probs) - 1.0) > IDENTITY_TOL:
            raise GameSpecError(f"per-secret probabilities sum to {math.fsum(probs)!r}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_picker_mix(cls, profile: PartitionProfile, delta: PickerMix) -> PerSecretMix:
        return cls(tuple(delta.expand(profile)))

    def __len__(self):
        return len(self.probs)


def _guard(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise OracleSizeError(f"{what} needs at most {limit} secrets, got {n}")


def capped_best_dictionary(delta: PerSecretMix, cap: int, gamma: float = 1.0) -> tuple[tuple[int, ...], float]:
    """Best K-subset by enumeration; ties keep the lexicographically first subset."""
    n = len(delta)
    _guard(n, MAX_DICTIONARY_SECRETS, "dictionary enumeration")
    if not 1 <= cap <= n:
        raise GameSpecError(f"cap {cap} out of range for {n} secrets")
    best, best_val = None, -math.inf
    for subset in itertools.combinations(range(n), cap):
        val = math.fsum(delta.probs[i] for i in subset)
        if val > best_val:
            best, best_val = subset, val
    return best, gamma * best_val


def costly_best_sequence(delta: PerSecretMix, params: CostlyParams) -> tuple[tuple[int, ...], float]:
    """Best guessing sequence over all ordered subsets, the empty one included.

    Among plans within 1e-12 of the best value the shortest wins, so a tie
    with quitting resolves to quitting.
    """
    n = len(delta)
    _guard(n, MAX_SEQUENCE_SECRETS, "sequence enumeration")
    q = delta.probs
    g, s = params.gamma, params.sigma
    best = [(), 0.0]

    def visit(seq, used, value, remaining):
        if value > best[1] + 1e-12 or (abs(value - best[1]) <= 1e-12 and len(seq) < len(best[0])):
            best[0], best[1] = tuple(seq), value
        for a in range(n):
            if used >> a & 1:
                continue
            # the a-th guess is paid for whenever the secret was not found earlier
            seq.append(a)
            visit(seq, used | 1 << a, value + g * q[a] - s * remaining, remaining - q[a])
            seq.pop()

    visit([], 0, 0.0, 1.0)
    return best[0], best[1]


def sequence_value(delta: PerSecretMix, params: CostlyParams, seq: Sequence[int]) -> float:
    """Guesser utility of a per-secret sequence, term by term."""
    found, cost, remaining = [], [], 1.0
    for a in seq:
        found.append(delta.probs[a])
        cost.append(remaining)
        remaining -= delta.probs[a]
    return params.gamma * math.fsum(found) - params.sigma * math.fsum(cost)


@dataclass
class ExhaustiveNECheck:
    ok: bool
    agrees: bool
    guesser_best: float
    picker_best: float
    closed_form: capped.NECheck


def verify_capped_ne_exhaustive(profile: PartitionProfile, params: CappedParams, delta: PickerMix,
                                rho: GuesserMarginals, epsilon: float = PROB_TOL) -> ExhaustiveNECheck:
    """Equilibrium check by full K-subset enumeration, compared with the closed-form check."""
    _guard(profile.total, MAX_NE_SECRETS, "equilibrium enumeration")
    closed = capped.verify_ne(profile, params, delta, rho, epsilon)
    mix = PerSecretMix.from_picker_mix(profile, delta)
    _, g_best = capped_best_dictionary(mix, params.cap, params.gamma)
    secret_costs = [c for c, n in zip(profile.costs, profile.sizes) for _ in range(n)]
    p_best = max(-c - params.lam * r for c, r in zip(secret_costs, rho.expand(profile)))
    ok = g_best - closed.guesser_value <= epsilon and p_best - closed.picker_value <= epsilon
    agrees = ok == closed.ok and g_best == closed.guesser_best and p_best == closed.picker_best
    return ExhaustiveNECheck(ok, agrees, g_best, p_best, closed)


@dataclass
class SimResult:
    picker_utility: float
    guesser_utility: float
    picker_se: float
    guesser_se: float
    episodes: int


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def simulate(profile: PartitionProfile, delta: PickerMix, guesser: GuesserMarginals | ExplorationPlan,
             params: CappedParams | CostlyParams, episodes: int, seed: int | None = None) -> SimResult:
    """Play the game ``episodes`` times and average both players' payoffs.

    A ``GuesserMarginals`` strategy is realized by the systematic dictionary
    sampler; a plan tries the secrets of each partition in index order.
    """
    if episodes < 1:
        raise GameSpecError("need at least one episode")
    rng = np.random.default_rng(seed)
    sizes = np.array(profile.sizes, dtype=np.int64)
    costs = np.array(profile.costs)
    part = rng.choice(profile.n, size=episodes, p=np.array(delta.mass) / math.fsum(delta.mass))
    within = (rng.random(episodes) * sizes[part]).astype(np.int64)
    base = -costs[part]
    if isinstance(guesser, GuesserMarginals):
        hit = _systematic_hits(profile, guesser, params.cap, part, within, rng.random(episodes))
        u_d = base - params.lam * hit
        u_a = params.gamma * hit
    else:
        guesser.validate(profile)
        # 1-based guess position of the picked secret when the plan reaches it
        pos = np.zeros(episodes)
        hit = np.zeros(episodes, dtype=bool)
        done = np.zeros(profile.n, dtype=np.int64)
        offset = 0
        for g, c in guesser.batches:
            sel = (part == g) & (within >= done[g]) & (within < done[g] + c)
            pos[sel] = offset + within[sel] - done[g] + 1
            hit |= sel
            done[g] += c
            offset += c
        length = guesser.length
        u_d = base - params.lam * hit
        u_a = np.where(hit, params.gamma - params.sigma * pos, -params.sigma * length)
    m_d, se_d = _mean_se(u_d)
    m_a, se_a = _mean_se(u_a)
    return SimResult(m_d, m_a, se_d, se_a, episodes)


def _systematic_hits(profile, rho, cap, part, within, u):
    """Whether the picked secret lands in a dictionary drawn by systematic sampling.

    Laying the marginals end to end, a secret occupying ``[a, a + r)`` is
    drawn iff some point ``u + k`` falls in its interval.
    """
    r = np.clip(np.array(rho.rho), 0.0, 1.0)
    total = float(np.dot(np.array(profile.sizes, dtype=float), r))
    if total <= 0:
        return np.zeros(part.shape, dtype=bool)
    r = r * (cap / total)
    starts = np.concatenate([[0.0], np.cumsum(np.array(profile.sizes, dtype=float) * r)[:-1]])
    a = starts[part] + within * r[part]
    return (np.ceil(a - u) + u < a + r[part]) & (r[part] > 0)


def lp_check_small(profile: PartitionProfile, params: CostlyParams, tol: float = PROB_TOL):
    """Commitment LP solved by enumerating the vertices of its feasible polytope.

    Each depth row is the utility of exhausting the first k partitions,
    read off ``eval_costly_plan`` at the pure masses (the utility is affine
    on the simplex).  Returns ``(nu, objective)`` or ``(None, None)`` when
    the polytope is empty.
    """
    n = profile.n
    if n > MAX_LP_PARTITIONS:
        raise OracleSizeError(f"vertex enumeration needs at most {MAX_LP_PARTITIONS} partitions, got {n}")
    rows = []
    for k in range(1, n + 1):
        plan = ExplorationPlan.full(profile, k)
        rows.append([eval_costly_plan(profile, params, _pure(n, i), plan) for i in range(n)])
    for i in range(n - 1):
        row = [0.0] * n
        row[i], row[i + 1] = -1.0 / profile.sizes[i], 1.0 / profile.sizes[i + 1]
        rows.append(row)
    for i in range(n):
        row = [0.0] * n
        row[i] = -1.0
        rows.append(row)
    G = np.array(rows)
    costs = np.array(profile.costs)
    best_nu, best_val = None, -math.inf
    for active in itertools.combinations(range(len(rows)), n - 1):
        A = np.vstack([np.ones(n), G[list(active)]])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        nu = np.linalg.solve(A, np.concatenate([[1.0], np.zeros(n - 1)]))
        if np.any(G @ nu > tol):
            continue
        val = float(-costs @ nu)
        if val > best_val + 1e-12:
            best_nu, best_val = nu, val
    if best_nu is None:
        return None, None
    return (best_nu + 0.0).tolist(), best_val


def _pure(n: int, i: int) -> PickerMix:
    return PickerMix(tuple(1.0 if j == i else 0.0 for j in range(n)))


def confirm_total_defeat(profile: PartitionProfile, params: CostlyParams, tol: float = PROB_TOL) -> bool:
    """Check by enumeration that picking the cheapest class and being found is an equilibrium.

    Against uniform play on the cheapest class the best sequence must find
    the secret for sure at value ``gamma - (|E_1|+1)*sigma/2``; the picker
    then loses ``lam`` wherever she moves, so staying cheapest is optimal.
    Each class cheap enough to be worth hiding in must also fail to deter
    on its own.
    """
    _guard(profile.total, MAX_SEQUENCE_SECRETS, "sequence enumeration")
    mix = PerSecretMix.from_picker_mix(profile, PickerMix.cheapest(profile))
    seq, value = costly_best_sequence(mix, params)
    found = math.fsum(mix.probs[a] for a in seq)
    expected = params.gamma - (profile.sizes[0] + 1) * params.sigma / 2
    if abs(found - 1.0) > tol or abs(value - expected) > tol:
        return False
    for i, c in enumerate(profile.costs):
        if c < profile.costs[0] + params.lam:
            alone = PerSecretMix(tuple(1.0 / profile.sizes[i] for _ in range(profile.sizes[i])))
            _, v_i = costly_best_sequence(alone, params)
            exhaust = sequence_value(alone, params, range(profile.sizes[i]))
            # a class deters alone when exhausting it loses money; equality counts as not deterring
            if exhaust < -tol or abs(v_i - max(0.0, exhaust)) > tol:
                return False
    return True


# random instances


def random_profile(rng: np.random.Generator, max_partitions: int = 5, max_size: int = 6,
                   max_total: int | None = None) -> PartitionProfile:
    """Sizes uniform in [1, max_size]; costs sorted uniform in [0, 1] at least 1e-3 apart."""
    while True:
        n = int(rng.integers(1, max_partitions + 1))
        sizes = tuple(int(x) for x in rng.integers(1, max_size + 1, size=n))
        if max_total is not None and sum(sizes) > max_total:
            continue
        costs = np.sort(rng.random(n))
        if n > 1 and np.diff(costs).min() < 1e-3:
            continue
        return PartitionProfile(sizes, tuple(float(c) for c in costs))


def log_uniform(rng: np.random.Generator, lo: float = 0.1, hi: float = 10.0) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_capped_instance(rng: np.random.Generator, **kw) -> tuple[PartitionProfile, CappedParams]:
    while True:
        profile = random_profile(rng, **kw)
        if profile.total >= 2:
            break
    cap = int(rng.integers(1, profile.total))
    return profile, CappedParams(log_uniform(rng), log_uniform(rng), cap)


def random_costly_instance(rng: np.random.Generator, **kw) -> tuple[PartitionProfile, CostlyParams]:
    profile = random_profile(rng, **kw)
    return profile, CostlyParams(log_uniform(rng), log_uniform(rng), log_uniform(rng))


def random_per_secret_mix(rng: np.random.Generator, n: int) -> PerSecretMix:
    """Dirichlet draw; a third of the time values are coarsened so that ties occur."""
    p = rng.dirichlet(np.ones(n))
    if rng.random() < 1 / 3:
        p = np.round(p * 4) + 0.0
        if p.sum() == 0:
            p[int(rng.integers(n))] = 1.0
        p = p / p.sum()
    return PerSecretMix(tuple(float(x) for x in p))


# verification suites


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failure_kinds: dict = field(default_factory=dict)
    first_failure: dict | None = None

    def record(self, ok: bool, instance: dict | None = None, kinds: Sequence[str] = (), detail=None):
        if ok:
            self.passed += 1
            return
        self.failed += 1
        for k in kinds:
            self.failure_kinds[k] = self.failure_kinds.get(k, 0) + 1
        if self.first_failure is None:
            self.first_failure = {"instance": instance, "checks": list(kinds), "detail": detail}

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failed": self.failed, "skipped": self.skipped,
                "failure_kinds": self.failure_kinds, "first_failure": self.first_failure}


def _instance(index, profile, params) -> dict:
    return {"index": index, **profile.to_dict(), "params": vars(params).copy()}


def capped_identity_failures(profile: PartitionProfile, params: CappedParams, report) -> list[str]:
    """Names of the closed-form identities violated by an ordinary or degenerate solution."""
    if report.classification == capped.TOTAL_DEFEAT:
        return []
    J = report.diagnostics["support_partitions"]
    rho = report.guesser_strategy.rho
    B = report.diagnostics["B"]
    bad = []
    levels = [-profile.costs[i] - params.lam * rho[i] for i in range(J)]
    if max(levels) - min(levels) > 1e-12 * max(1.0, max(abs(x) for x in levels)):
        bad.append("picker_indifference")
    sizes = profile.sizes[:J]
    if abs(math.fsum(s * b for s, b in zip(sizes, B))) > 1e-12 * max(1.0, math.fsum(abs(s * b) for s, b in zip(sizes, B))):
        bad.append("bias_sum")
    if abs(report.guesser_strategy.budget(profile) - params.cap) > PROB_TOL * max(1.0, params.cap):
        bad.append("budget")
    if any(r >= 1.0 for r in rho):
        bad.append("inclusion_below_one")
    return bad


def suite_capped_ne(seed: int, instances: int, max_secrets: int = MAX_NE_SECRETS) -> SuiteResult:
    res = SuiteResult("capped_ne")
    rng = np.random.default_rng([seed, 1])
    for k in range(instances):
        profile, params = random_capped_instance(rng)
        inst = _instance(k, profile, params)
        try:
            rep = capped.solve_ne(profile, params)
        except (capped.SolverError, GameSpecError) as exc:
            res.record(False, inst, ["solver_error"], str(exc))
            continue
        kinds = capped_identity_failures(profile, params, rep)
        check = capped.verify_ne(profile, params, rep.picker_strategy, rep.guesser_strategy)
        if not check.ok:
            kinds.append(f"{check.certificate['player']}_deviation")
        if profile.total <= max_secrets:
            ex = verify_capped_ne_exhaustive(profile, params, rep.picker_strategy, rep.guesser_strategy)
            if not ex.agrees:
                kinds.append("oracle_disagreement")
        res.record(not kinds, inst, kinds, check.certificate)
    return res


def suite_capped_topk(seed: int, instances: int, max_secrets: int = MAX_NE_SECRETS) -> SuiteResult:
    res = SuiteResult("capped_topk")
    rng = np.random.default_rng([seed, 2])
    for k in range(instances):
        profile = random_profile(rng, max_total=max_secrets)
        if profile.total < 2:
            res.skipped += 1
            continue
        cap = int(rng.integers(1, profile.total))
        mass = rng.dirichlet(np.ones(profile.n))
        delta = PickerMix(tuple(float(x) for x in mass / math.fsum(mass)))
        closed, _ = capped.top_k_mass(profile, delta, cap)
        _, enum = capped_best_dictionary(PerSecretMix.from_picker_mix(profile, delta), cap)
        res.record(closed == enum, {"index": k, **profile.to_dict(), "cap": cap}, ["topk_mismatch"],
                   {"closed_form": closed, "enumeration": enum})
    return res


def suite_costly_best_response(seed: int, instances: int, max_secrets: int = MAX_SEQUENCE_SECRETS) -> SuiteResult:
    res = SuiteResult("costly_best_response")
    rng = np.random.default_rng([seed, 3])
    for k in range(instances):
        n = int(rng.integers(1, max_secrets + 1))
        mix = random_per_secret_mix(rng, n)
        params = CostlyParams(1.0, log_uniform(rng), log_uniform(rng))
        plan, fast = costly.best_response(mix.probs, params)
        _, slow = costly_best_sequence(mix, params)
        res.record(abs(fast - slow) <= PROB_TOL, {"index": k, "delta": list(mix.probs), "params": vars(params)},
                   ["best_response_mismatch"], {"threshold_search": fast, "enumeration": slow})
    return res


def suite_costly_sse(seed: int, instances: int) -> SuiteResult:
    res = SuiteResult("costly_sse")
    rng = np.random.default_rng([seed, 4])
    for k in range(instances):
        profile, params = random_costly_instance(rng, max_partitions=MAX_LP_PARTITIONS)
        inst = _instance(k, profile, params)
        try:
            rep = costly.solve_sse(profile, params)
        except (capped.SolverError, GameSpecError) as exc:
            res.record(False, inst, ["solver_error"], str(exc))
            continue
        kinds = []
        floor = -profile.costs[0] - params.lam
        if rep.picker_utility < floor - PROB_TOL:
            kinds.append("below_maximin")
        if rep.classification == costly.DETERRENCE:
            _, obj = lp_check_small(profile, params)
            if obj is None or abs(obj - rep.picker_utility) > 1e-7:
                kinds.append("lp_vertex_mismatch")
            _, value = costly.best_response(rep.picker_strategy, params, profile)
            if value > PROB_TOL:
                kinds.append("not_deterred")
        res.record(not kinds, inst, kinds, {"picker_utility": rep.picker_utility})
    return res


def suite_costly_regime(seed: int, instances: int, max_secrets: int = MAX_SEQUENCE_SECRETS) -> SuiteResult:
    res = SuiteResult("costly_regime")
    rng = np.random.default_rng([seed, 5])
    for k in range(instances):
        profile = random_profile(rng, max_partitions=3, max_size=3, max_total=max_secrets)
        # gamma near the total-defeat threshold of the cheap classes so both outcomes occur
        lam = log_uniform(rng)
        sigma = log_uniform(rng)
        cheap = [s for s, c in zip(profile.sizes, profile.costs) if c < profile.costs[0] + lam]
        gamma = (max(cheap) + 1) * sigma / 2 * float(rng.uniform(0.7, 1.5))
        params = CostlyParams(lam, gamma, sigma)
        regime = costly.classify_regime(profile, params)
        if regime.kind != costly.TOTAL_DEFEAT:
            res.skipped += 1
            continue
        res.record(confirm_total_defeat(profile, params), _instance(k, profile, params), ["total_defeat_not_confirmed"])
    return res


SUITES = {
    "capped_ne": suite_capped_ne,
    "capped_topk": suite_capped_topk,
    "costly_best_response": suite_costly_best_response,
    "costly_sse": suite_costly_sse,
    "costly_regime": suite_costly_regime,
}


def run_verification(seed: int, instances: int, max_capped_secrets: int = MAX_NE_SECRETS,
                     max_sequence_secrets: int = MAX_SEQUENCE_SECRETS) -> dict:
    """Run every suite; the summary is a plain dict ready for JSON."""
    if instances < 1:
        raise GameSpecError("instances must be at least 1")
    if not 1 <= max_capped_secrets <= MAX_NE_SECRETS:
        raise GameSpecError(f"capped size cap must be in [1, {MAX_NE_SECRETS}]")
    if not 1 <= max_sequence_secrets <= MAX_SEQUENCE_SECRETS:
        raise GameSpecError(f"sequence size cap must be in [1, {MAX_SEQUENCE_SECRETS}]")
    results = [
        suite_capped_ne(seed, instances, max_capped_secrets),
        suite_capped_topk(seed, instances, max_capped_secrets),
        suite_costly_best_response(seed, instances, max_sequence_secrets),
        suite_costly_sse(seed, instances),
        suite_costly_regime(seed, instances, max_sequence_secrets),
    ]
    return {
        "seed": seed,
        "instances": instances,
        "ok": all(r.failed == 0 for r in results),
        "suites": {r.name: r.to_dict() for r in results},
    }
