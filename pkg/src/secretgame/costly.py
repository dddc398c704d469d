"""Costly-guesses game: equilibrium regimes, guesser best responses, and the
picker's optimal commitment as a linear program."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import simplex
from .capped import SolverError
from .model import (
    PROB_TOL,
    QUIT,
    CostlyParams,
    ExplorationPlan,
    PartitionProfile,
    PickerMix,
    SolveReport,
    costly_picker_utility,
)

GUESSER_QUITS = "guesser_quits"
TOTAL_DEFEAT = "total_defeat"
BOUNDED = "bounded"
DETERRENCE = "deterrence"
CHEAPEST_PICK = "cheapest_pick"


@dataclass(frozen=True)
class CostlyRegime:
    """Equilibrium regime.  ``M`` is a 1-based partition number."""

    kind: str
    M: int | None
    utility: float
    boundary: tuple[str, ...] = ()

    @property
    def is_bound(self) -> bool:
        return self.kind == BOUNDED


def classify_regime(profile: PartitionProfile, params: CostlyParams) -> CostlyRegime:
    """Which equilibrium regime the game is in.

    Exact boundaries are resolved with non-strict comparisons: ``gamma == sigma``
    counts as the guesser staying out, ``gamma == (|E_i|+1)*sigma/2`` counts
    as the partition being too small to deter.  Both are reported in
    ``boundary``.
    """
    g, s, lam = params.gamma, params.sigma, params.lam
    c1 = profile.costs[0]
    flags = []
    if g <= s:
        if g == s:
            flags.append("gamma == sigma")
        return CostlyRegime(GUESSER_QUITS, None, -c1, tuple(flags))
    relevant = [i for i, c in enumerate(profile.costs) if c < c1 + lam]
    for i in relevant:
        if g == (profile.sizes[i] + 1) * s / 2:
            flags.append(f"gamma == (|E_{i + 1}|+1)*sigma/2")
    if all(g >= (profile.sizes[i] + 1) * s / 2 for i in relevant):
        return CostlyRegime(TOTAL_DEFEAT, None, -c1 - lam, tuple(flags))
    for i, (size, c) in enumerate(zip(profile.sizes, profile.costs)):
        if g < (size + 1) * s / 2 and c <= c1 + lam:
            return CostlyRegime(BOUNDED, i + 1, -c, tuple(flags))
    raise AssertionError("unreachable: some relevant partition deters")


def _groups(delta, profile):
    if isinstance(delta, PickerMix):
        if profile is None:
            raise TypeError("a PickerMix needs its profile")
        return list(profile.sizes), delta.per_secret(profile)
    q = [float(x) for x in delta]
    if abs(math.fsum(q) - 1.0) > 1e-12 or any(x < 0 for x in q):
        raise ValueError("per-secret distribution must be non-negative and sum to 1")
    return [1] * len(q), q


def best_response(delta: PickerMix | Sequence[float], params: CostlyParams,
                  profile: PartitionProfile | None = None, tol: float = PROB_TOL) -> tuple[ExplorationPlan, float]:
    """Guesser's best plan against a picking distribution.

    Good plans try secrets in decreasing probability and never stop inside
    a run of equally likely secrets, so only stopping points at group
    boundaries of the sorted order need to be scored.  Values within
    ``tol`` of the best are ties, resolved toward the shorter plan (quitting
    first), which favours the picker.  ``tol`` is relative to the largest
    utility term, ``max(1, gamma, sigma * n_secrets)``.

    ``delta`` is either a ``PickerMix`` over ``profile`` or a plain
    per-secret distribution, in which case plan batches name single secrets.
    """
    sizes, q = _groups(delta, profile)
    order = sorted(range(len(q)), key=lambda i: -q[i])
    c = np.array([sizes[i] for i in order], dtype=float)
    p = np.array([q[i] for i in order])
    found = c * p
    remaining_before = 1.0 - np.concatenate([[0.0], np.cumsum(found)[:-1]])
    tries = c * remaining_before - p * c * (c - 1) / 2
    values = params.gamma * np.cumsum(found) - params.sigma * np.cumsum(tries)
    tol = tol * max(1.0, params.gamma, params.sigma * float(c.sum()))
    best = float(values.max()) if values.size else 0.0
    if best <= tol:
        return QUIT, 0.0
    k = int(np.flatnonzero(values >= best - tol)[0])
    plan = ExplorationPlan(tuple((order[i], sizes[order[i]]) for i in range(k + 1)))
    return plan, float(values[k])


@dataclass
class LpDescription:
    """Commitment LP over per-partition masses ``nu``: maximize ``c @ nu``.

    ``A_ub`` stacks the N-1 monotonicity rows followed by the N deterrence
    rows (one per depth of cost-ordered exhaustive exploration).
    """

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    n_monotone: int
    labels: list[str] = field(default_factory=list)

    @property
    def deterrence_rows(self) -> tuple[np.ndarray, np.ndarray]:
        return self.A_ub[self.n_monotone:], self.b_ub[self.n_monotone:]


def build_sse_lp(profile: PartitionProfile, params: CostlyParams) -> LpDescription:
    n = profile.n
    size = np.array([float(s) for s in profile.sizes])
    g, s = params.gamma, params.sigma
    mono = np.zeros((max(n - 1, 0), n))
    for i in range(n - 1):
        mono[i, i] = -1.0 / size[i]
        mono[i, i + 1] = 1.0 / size[i + 1]
    # depth-K row: gamma*sum nu_i - sigma*sum_i [|E_i|(1 - sum_{j<i} nu_j) - (|E_i|-1) nu_i / 2] <= 0,
    # with the constant sigma*S_K moved to the right-hand side
    cum = np.array([float(x) for x in profile.cumulative_sizes()])
    later = cum[:, None] - cum[None, :]  # [K, i] -> |E_{i+1}| + ... + |E_K|
    det = np.tril(g + s * (size[None, :] - 1) / 2 + s * later)
    rhs = s * cum
    labels = [f"monotone {i + 1}" for i in range(n - 1)] + [f"deter depth {K + 1}" for K in range(n)]
    return LpDescription(
        c=-np.array(profile.costs),
        A_ub=np.vstack([mono, det]),
        b_ub=np.concatenate([np.zeros(n - 1), rhs]),
        A_eq=np.ones((1, n)),
        b_eq=np.ones(1),
        n_monotone=n - 1,
        labels=labels,
    )


@dataclass
class LpSolution:
    nu: list[float] | None
    objective: float | None
    status: str
    binding_constraints: list[str]
    iterations: int = 0
    uniform_blend: float = 0.0


def prefix_mixture_matrix(profile: PartitionProfile) -> np.ndarray:
    """Column k is the mass vector of uniform play over the first k+1 partitions."""
    size = np.array([float(s) for s in profile.sizes])
    cum = np.cumsum(size)
    T = size[:, None] / cum[None, :]
    return np.triu(T)


def solve_lp(profile: PartitionProfile, lp: LpDescription, tol: float = PROB_TOL) -> LpSolution:
    """Solve the commitment LP.

    Any mass vector that is non-increasing per secret is a convex mixture of
    uniform distributions over cost prefixes, so the LP is solved over the
    mixture weights: non-negativity and monotonicity become plain bounds
    and only the deterrence rows remain.  Rows are normalized to a unit
    right-hand side and columns are equilibrated, which matters when
    class sizes span many magnitudes.
    """
    T = prefix_mixture_matrix(profile)
    A, b = lp.deterrence_rows
    Az = (A @ T) / b[:, None]
    cz = lp.c @ T
    _, cs = simplex.equilibrate(Az, rows=False)
    res = simplex.linprog_max(cz * cs, Az * cs[None, :], np.ones(len(b)), cs[None, :], np.ones(1), tol=tol)
    if res.status != simplex.OPTIMAL:
        return LpSolution(None, None, res.status, [], res.iterations)
    z = np.clip(res.x * cs, 0.0, None)
    z /= z.sum()
    nu = T @ z
    nu = np.clip(nu, 0.0, None)
    nu /= nu.sum()
    nu, blend = _restore_feasibility(profile, A, b, nu)
    value = A @ nu - b
    binding = [lp.labels[lp.n_monotone + k] for k in range(profile.n) if value[k] >= -tol * max(1.0, b[k])]
    binding += [lp.labels[k] for k in range(lp.n_monotone) if z[k] <= tol]
    return LpSolution(nu.tolist(), float(lp.c @ nu), simplex.OPTIMAL, binding, res.iterations, blend)


def _restore_feasibility(profile, A, b, nu, margin=1e-12):
    """Blend ``nu`` with uniform play just enough that every deterrence row holds with a hair to spare.

    Uniform play over all secrets satisfies every row strictly below the
    boundary, rows are affine on the simplex and the blend stays monotone,
    so the smallest sufficient weight costs at most the LP's round-off.
    """
    uniform = np.array([float(s) for s in profile.sizes]) / float(profile.total)
    r_nu = A @ nu - b + margin * b
    r_uni = A @ uniform - b + margin * b
    bad = (r_nu > 0) & (r_uni < r_nu)
    if not bad.any():
        return nu, 0.0
    w = float(min(1.0, (r_nu[bad] / (r_nu[bad] - r_uni[bad])).max()))
    out = (1.0 - w) * nu + w * uniform
    return out / out.sum(), w


def solve_ne(profile: PartitionProfile, params: CostlyParams) -> SolveReport:
    """Equilibrium outcome per regime; the middle regime only has an upper bound."""
    regime = classify_regime(profile, params)
    diag = {"regime": regime.kind, "M": regime.M, "boundary": list(regime.boundary)}
    cheapest = PickerMix.cheapest(profile)
    if regime.kind == GUESSER_QUITS:
        return SolveReport(GUESSER_QUITS, cheapest, QUIT, regime.utility, 0.0, diag)
    if regime.kind == TOTAL_DEFEAT:
        plan = ExplorationPlan.full(profile)
        g_val = params.gamma - (profile.sizes[0] + 1) * params.sigma / 2
        return SolveReport(TOTAL_DEFEAT, cheapest, plan, regime.utility, g_val, diag)
    diag["utility_upper_bound"] = regime.utility
    return SolveReport(BOUNDED, None, None, regime.utility, None, diag)


def solve_sse(profile: PartitionProfile, params: CostlyParams, tol: float = PROB_TOL) -> SolveReport:
    """Picker's optimal commitment and the guesser's reply to it."""
    g, s, lam = params.gamma, params.sigma, params.lam
    c1 = profile.costs[0]
    cheapest = PickerMix.cheapest(profile)
    diag: dict = {"boundary": []}
    if g < s:
        diag["lp_status"] = "skipped"
        return SolveReport(GUESSER_QUITS, cheapest, QUIT, -c1, 0.0, diag)

    uniform_value = g - (profile.total + 1) * s / 2
    if uniform_value <= 0:
        if uniform_value == 0:
            diag["boundary"].append("(|P|+1)*sigma/2 == gamma")
        lp = build_sse_lp(profile, params)
        sol = solve_lp(profile, lp, tol)
        diag.update(lp_status=sol.status, lp_iterations=sol.iterations, uniform_blend=sol.uniform_blend,
                    binding_constraints=sol.binding_constraints, lp_objective=sol.objective)
        if sol.status != simplex.OPTIMAL:
            raise SolverError(f"commitment LP reported {sol.status} although uniform play is feasible")
        if sol.objective >= -c1 - lam:
            if sol.objective == -c1 - lam:
                diag["boundary"].append("LP value == -C_1 - lambda")
            delta = PickerMix(tuple(sol.nu))
            plan, value = best_response(delta, params, profile, tol)
            diag["nu"] = sol.nu
            diag["deterrence_certificate"] = {"best_response_value": value, "plan": plan.to_list()}
            if not plan.is_quit:
                raise SolverError(f"LP commitment does not deter: best response value {value!r}")
            return SolveReport(DETERRENCE, delta, plan, sol.objective, 0.0, diag)
    else:
        diag["lp_status"] = "skipped"

    plan, value = best_response(cheapest, params, profile, tol)
    u_d = costly_picker_utility(profile, params, cheapest, plan)
    return SolveReport(CHEAPEST_PICK, cheapest, plan, u_d, value, diag)
