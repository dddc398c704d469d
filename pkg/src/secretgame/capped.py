"""Closed-form solution of the capped-guesses game.

The guesser commits to a dictionary of ``K`` secrets; the picker pays the
usability cost of her secret plus ``lam`` if it is in the dictionary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import (
    IDENTITY_TOL,
    PROB_TOL,
    CappedParams,
    GameSpecError,
    GuesserMarginals,
    PartitionProfile,
    PickerMix,
    SolveReport,
    eval_capped,
)

ORDINARY = "ordinary"
TOTAL_DEFEAT = "total_defeat"
DEGENERATE = "degenerate"

_EXPAND_LIMIT = 4096


class SolverError(RuntimeError):
    """An internal guarantee of a solver did not hold."""


@dataclass(frozen=True)
class CappedClassification:
    """Regime of a capped game.

    ``L``, ``J`` and ``J_set`` are 1-based partition numbers.  ``support``
    is the number of partitions the picker randomizes over in the ordinary
    regime: ``J`` when ``J_set`` is non-empty, otherwise ``L``.
    """

    L: int
    J_set: frozenset[int]
    J: int | None
    support: int
    kind: str
    degenerate: bool
    support_value: float
    notes: tuple[str, ...] = field(default=())


def _close(a: float, b: float, rel: float = IDENTITY_TOL) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b))


def compute_L(profile: PartitionProfile, cap: int) -> int:
    """Smallest number of cheapest partitions holding more than ``cap`` secrets."""
    if cap >= profile.total:
        raise GameSpecError(f"cap K={cap} must be smaller than |P|={profile.total}")
    for l, s in enumerate(profile.cumulative_sizes(), start=1):
        if s > cap:
            return l
    raise AssertionError("unreachable")


def _weighted_costs(profile: PartitionProfile) -> list[float]:
    """Running sums of C_i*|E_i| (index j holds the sum over the first j partitions)."""
    out = [0.0]
    total = comp = 0.0
    for c, s in zip(profile.costs, profile.sizes):
        # Neumaier compensated summation
        x = c * s
        t = total + x
        comp += (total - t) + x if abs(total) >= abs(x) else (x - t) + total
        total = t
        out.append(total + comp)
    return out


def prefix_value(profile: PartitionProfile, lam: float, cap: int, j: int) -> float:
    """Overall cost of uniform play over the first ``j`` partitions, for ``j >= L``."""
    w = _weighted_costs(profile)[j]
    return (w + lam * cap) / sum(profile.sizes[:j])


def classify(profile: PartitionProfile, params: CappedParams) -> CappedClassification:
    params.check(profile)
    lam, cap = params.lam, params.cap
    L = compute_L(profile, cap)
    w = _weighted_costs(profile)
    cum = [0] + profile.cumulative_sizes()
    members = []
    for j in range(L + 1, profile.n + 1):
        lhs = lam * cap + w[j - 1]
        rhs = profile.costs[j - 1] * cum[j - 1]
        if lhs >= rhs or _close(lhs, rhs):
            members.append(j)
    J = max(members) if members else None
    support = J if J is not None else L
    value = prefix_value(profile, lam, cap, support)
    degenerate = False
    if J is not None:
        degenerate = _close(lam * cap + w[J - 1], profile.costs[J - 1] * cum[J - 1])
    notes = []
    if J is None:
        notes.append("J_set empty: support falls back to the first L partitions")
    if value >= profile.costs[0] + lam:
        kind = TOTAL_DEFEAT
    elif degenerate:
        kind = DEGENERATE
    else:
        kind = ORDINARY
    return CappedClassification(L, frozenset(members), J, support, kind, degenerate, value, tuple(notes))


def bias_terms(profile: PartitionProfile, lam: float, support: int) -> list[float]:
    """Per-partition offset of the guesser from uniform inclusion over the support."""
    s = sum(profile.sizes[:support])
    w = _weighted_costs(profile)[support]
    return [(w - profile.costs[i] * s) / (lam * s) for i in range(support)]


def maximin_utility(profile: PartitionProfile, params: CappedParams) -> float:
    cls = classify(profile, params)
    if cls.kind == TOTAL_DEFEAT:
        return -profile.costs[0] - params.lam
    return -cls.support_value


def _water_fill(rho: list[float], sizes: tuple[int, ...], budget: float, targets: Iterable[int]) -> None:
    """Raise ``rho`` on ``targets`` by a common per-secret amount (capped at 1) until ``budget`` is spent."""
    targets = [i for i in targets if rho[i] < 1.0]
    while budget > 0 and targets:
        room = math.fsum(sizes[i] for i in targets)
        step = min(budget / room, min(1.0 - rho[i] for i in targets))
        for i in targets:
            rho[i] = min(1.0, rho[i] + step)
        budget -= step * room
        if budget <= 1e-15 * room:
            break
        targets = [i for i in targets if rho[i] < 1.0 - 1e-15]


def _total_defeat_marginals(profile: PartitionProfile, params: CappedParams):
    lam, cap, c1 = params.lam, params.cap, profile.costs[0]
    deter = [i for i, c in enumerate(profile.costs) if c < c1 + lam]
    thresholds = {i: (1.0 if i == 0 else max(0.0, 1.0 - (profile.costs[i] - c1) / lam)) for i in deter}
    need = math.fsum(profile.sizes[i] * t for i, t in thresholds.items())
    slack = cap - need
    if slack < -PROB_TOL * cap:
        raise SolverError(
            f"total-defeat deterrence needs {need!r} guesses but only K={cap} are available")
    slack = max(0.0, slack)
    rho = [0.0] * profile.n
    for i, t in thresholds.items():
        rho[i] = t
    others = [i for i in deter if i != 0]
    eta = 0.0
    if others:
        eta = (slack / 2) / math.fsum(profile.sizes[i] for i in others)
        for i in others:
            rho[i] = min(1.0, rho[i] + eta)
    # spend what is left anywhere outside the cheapest partition so the dictionary has exactly K entries
    left = cap - math.fsum(s * r for s, r in zip(profile.sizes, rho))
    _water_fill(rho, profile.sizes, left, range(1, profile.n))
    diag = {
        "deterrence_set": [i + 1 for i in deter],
        "thresholds": [thresholds.get(i, 0.0) for i in range(profile.n)],
        "eta": eta,
        "slack": slack,
    }
    return rho, diag


def solve_ne(profile: PartitionProfile, params: CappedParams) -> SolveReport:
    """Equilibrium of the capped game; the picker's part is also maximin and Stackelberg-optimal."""
    cls = classify(profile, params)
    lam, cap = params.lam, params.cap
    diag = {
        "L": cls.L,
        "J_set": sorted(cls.J_set),
        "J": cls.J,
        "support_partitions": cls.support,
        "degenerate": cls.degenerate,
        "notes": list(cls.notes),
    }
    if cls.kind == TOTAL_DEFEAT:
        rho, extra = _total_defeat_marginals(profile, params)
        diag.update(extra)
        diag["B"] = None
        return SolveReport(
            classification=TOTAL_DEFEAT,
            picker_strategy=PickerMix.cheapest(profile),
            guesser_strategy=GuesserMarginals(tuple(rho)),
            picker_utility=maximin_utility(profile, params),
            guesser_utility=params.gamma,
            diagnostics=diag,
        )

    J = cls.support
    s = sum(profile.sizes[:J])
    B = bias_terms(profile, lam, J)
    rho = [max(0.0, cap / s + b) for b in B] + [0.0] * (profile.n - J)
    if any(r >= 1.0 for r in rho):
        raise SolverError(f"ordinary regime produced an inclusion probability >= 1: {rho}")
    diag["B"] = B
    return SolveReport(
        classification=cls.kind,
        picker_strategy=PickerMix.uniform_prefix(profile, J),
        guesser_strategy=GuesserMarginals(tuple(rho)),
        picker_utility=maximin_utility(profile, params),
        guesser_utility=params.gamma * cap / s,
        diagnostics=diag,
    )


def top_k_mass(profile: PartitionProfile, delta: PickerMix, cap: int) -> tuple[float, list[tuple[int, int]]]:
    """Largest picker mass any K-dictionary can cover, and which secrets achieve it."""
    q = delta.per_secret(profile)
    order = sorted(range(profile.n), key=lambda i: -q[i])
    left, picks, mass = cap, [], []
    for i in order:
        if not left:
            break
        take = min(left, profile.sizes[i])
        picks.append((i, take))
        # per-secret terms on small groups so the sum matches a subset enumeration exactly
        mass.extend([q[i]] * take if take <= _EXPAND_LIMIT else [take * q[i]])
        left -= take
    return math.fsum(mass), picks


@dataclass
class NECheck:
    ok: bool
    guesser_value: float
    guesser_best: float
    picker_value: float
    picker_best: float
    certificate: dict | None

    def __bool__(self):
        return self.ok


def verify_ne(profile: PartitionProfile, params: CappedParams, delta: PickerMix,
              rho: GuesserMarginals, epsilon: float = 1e-9) -> NECheck:
    """Check both players are within ``epsilon`` of their best-response values."""
    u_d, u_a = eval_capped(profile, params, delta, rho)
    mass, picks = top_k_mass(profile, delta, params.cap)
    g_best = params.gamma * mass
    per_partition = [-c - params.lam * r for c, r in zip(profile.costs, rho.rho)]
    p_arg = int(np.argmax(per_partition))
    p_best = per_partition[p_arg]
    cert = None
    if g_best - u_a > epsilon:
        cert = {"player": "guesser", "deviation": [{"partition": i, "count": c} for i, c in picks],
                "current": u_a, "best": g_best, "gain": g_best - u_a}
    elif p_best - u_d > epsilon:
        cert = {"player": "picker", "deviation": {"partition": p_arg},
                "current": u_d, "best": p_best, "gain": p_best - u_d}
    return NECheck(cert is None, u_a, g_best, u_d, p_best, cert)


def sample_dictionary(rho: GuesserMarginals, profile: PartitionProfile, cap: int,
                      rng: np.random.Generator | int | None = None) -> list[int]:
    """Draw K distinct secrets whose inclusion probabilities equal the marginals.

    Systematic sampling: lay the marginals end to end on [0, K) and take the
    secrets under the points u, u+1, ..., u+K-1 for a single uniform u.
    Secrets are numbered globally, partition by partition.
    """
    if any(r > 1 + PROB_TOL or r < -PROB_TOL for r in rho.rho):
        raise GameSpecError("marginals must lie in [0, 1]")
    total = rho.budget(profile)
    if abs(total - cap) > PROB_TOL * max(1.0, cap):
        raise GameSpecError(f"marginals spend {total!r} guesses, expected K={cap}")
    rng = np.random.default_rng(rng)
    u = float(rng.random())
    scale = cap / total
    out = []
    start = 0.0
    offsets = profile.offsets()
    last = None
    for i, (r, size) in enumerate(zip(rho.rho, profile.sizes)):
        r = min(1.0, max(0.0, r)) * scale
        if r <= 0:
            continue
        last = i
        end = start + size * r
        k = math.ceil(start - u)
        while u + k < end and k < cap:
            j = min(size - 1, int((u + k - start) / r))
            out.append(offsets[i] + j)
            k += 1
        start = end
    if len(out) == cap - 1 and last is not None:
        # rounding left the final point just past the end of the line; it belongs to the last secret
        out.append(offsets[last] + profile.sizes[last] - 1)
    out = sorted(set(out))
    if len(out) != cap:
        raise SolverError(f"systematic sampling produced {len(out)} distinct secrets, expected {cap}")
    return out


def sweep_capped(profile: PartitionProfile, lam: float, gamma: float, caps: Iterable[int],
                 executor=None) -> list[dict]:
    """Solve one capped game per cap; failures land in the row's ``error`` field."""
    caps = list(caps)
    mapper = executor.map if executor is not None else map
    return list(mapper(lambda k: _sweep_row(profile, lam, gamma, k), caps))


def _sweep_row(profile, lam, gamma, cap) -> dict:
    row = {"K": cap, "classification": "", "picker_utility": math.nan, "picker_loss": math.nan,
           "support_size": 0, "find_probability": math.nan, "error": ""}
    try:
        rep = solve_ne(profile, CappedParams(lam, gamma, cap))
    except (GameSpecError, SolverError) as exc:
        row["error"] = str(exc)
        return row
    if rep.classification == TOTAL_DEFEAT:
        support, find = profile.sizes[0], 1.0
    else:
        support = sum(profile.sizes[:rep.diagnostics["support_partitions"]])
        find = cap / support
    row.update(classification=rep.classification, picker_utility=rep.picker_utility,
               picker_loss=-rep.picker_utility, support_size=support, find_probability=find)
    return row
