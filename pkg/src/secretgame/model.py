"""Game descriptions, strategy types and exact expected-utility evaluation.

Partition indices are 0-based everywhere in this package except in the
classification records (``L``, ``J``, ``M`` and friends), which use the
1-based partition numbers of the underlying analysis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

PROB_TOL = 1e-9
IDENTITY_TOL = 1e-12


class GameSpecError(ValueError):
    """Raised for malformed game descriptions or invalid strategies."""


@dataclass(frozen=True)
class PartitionProfile:
    """Ordered cost classes of the secret space.

    ``sizes[i]`` is the number of secrets in class ``i`` (exact Python int,
    so key-length models up to 2**65 are fine) and ``costs[i]`` its
    usability cost.  Costs must be strictly increasing.
    """

    sizes: tuple[int, ...]
    costs: tuple[float, ...]

    def __post_init__(self):
        sizes = tuple(self.sizes)
        costs = tuple(float(c) for c in self.costs)
        if not sizes:
            raise GameSpecError("profile needs at least one partition")
        if len(sizes) != len(costs):
            raise GameSpecError("sizes and costs differ in length")
        for i, s in enumerate(sizes):
            if isinstance(s, bool) or int(s) != s or s < 1:
                raise GameSpecError(f"partition {i}: size must be a positive integer, got {s!r}")
        for i, c in enumerate(costs):
            if not math.isfinite(c) or c < 0:
                raise GameSpecError(f"partition {i}: cost must be finite and non-negative, got {c!r}")
            if i and c <= costs[i - 1]:
                raise GameSpecError(
                    f"partition {i}: cost {c!r} is not strictly greater than previous cost {costs[i - 1]!r}")
        object.__setattr__(self, "sizes", tuple(int(s) for s in sizes))
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, float]]) -> PartitionProfile:
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def cumulative_sizes(self) -> list[int]:
        out, acc = [], 0
        for s in self.sizes:
            acc += s
            out.append(acc)
        return out

    def offsets(self) -> list[int]:
        """Global index of the first secret of each partition."""
        return [c - s for c, s in zip(self.cumulative_sizes(), self.sizes)]

    def partition_of(self, secret: int) -> int:
        for i, c in enumerate(self.cumulative_sizes()):
            if secret < c:
                return i
        raise IndexError(secret)

    def to_dict(self) -> dict:
        return {"partitions": [{"size": s, "cost": c} for s, c in zip(self.sizes, self.costs)]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: Any) -> PartitionProfile:
        if not isinstance(data, dict) or "partitions" not in data:
            raise GameSpecError('game spec must be an object with a "partitions" list')
        parts = data["partitions"]
        if not isinstance(parts, list) or not parts:
            raise GameSpecError('"partitions" must be a non-empty list')
        sizes, costs = [], []
        for i, p in enumerate(parts):
            if not isinstance(p, dict) or "size" not in p or "cost" not in p:
                raise GameSpecError(f'partition {i}: expected an object with "size" and "cost"')
            size, cost = p["size"], p["cost"]
            if isinstance(size, bool) or not isinstance(size, int):
                raise GameSpecError(f"partition {i}: size must be an integer, got {size!r}")
            if isinstance(cost, bool) or not isinstance(cost, (int, float)):
                raise GameSpecError(f"partition {i}: cost must be a number, got {cost!r}")
            sizes.append(size)
            costs.append(float(cost))
        return cls(tuple(sizes), tuple(costs))

    @classmethod
    def from_json(cls, text: str) -> PartitionProfile:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GameSpecError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class CappedParams:
    lam: float
    gamma: float
    cap: int

    def __post_init__(self):
        if not self.lam > 0:
            raise GameSpecError(f"lambda must be positive, got {self.lam!r}")
        if not self.gamma > 0:
            raise GameSpecError(f"gamma must be positive, got {self.gamma!r}")
        if isinstance(self.cap, bool) or int(self.cap) != self.cap or self.cap < 1:
            raise GameSpecError(f"cap K must be a positive integer, got {self.cap!r}")

    def check(self, profile: PartitionProfile) -> None:
        if self.cap >= profile.total:
            raise GameSpecError(
                f"cap K={self.cap} must be smaller than the number of secrets |P|={profile.total}")


@dataclass(frozen=True)
class CostlyParams:
    lam: float
    gamma: float
    sigma: float

    def __post_init__(self):
        for name in ("lam", "gamma", "sigma"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise GameSpecError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class PickerMix:
    """Mass per partition, spread uniformly inside each partition."""

    mass: tuple[float, ...]

    def __post_init__(self):
        mass = tuple(float(m) for m in self.mass)
        if any(not math.isfinite(m) or m < 0 for m in mass):
            raise GameSpecError(f"picker masses must be non-negative: {mass}")
        if abs(math.fsum(mass) - 1.0) > IDENTITY_TOL:
            raise GameSpecError(f"picker masses sum to {math.fsum(mass)!r}, not 1")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform_prefix(cls, profile: PartitionProfile, j: int) -> PickerMix:
        """Uniform over the first ``j`` partitions (``j`` counts partitions)."""
        s = sum(profile.sizes[:j])
        return cls(tuple(profile.sizes[i] / s if i < j else 0.0 for i in range(profile.n)))

    @classmethod
    def cheapest(cls, profile: PartitionProfile) -> PickerMix:
        return cls.uniform_prefix(profile, 1)

    def per_secret(self, profile: PartitionProfile) -> list[float]:
        return [m / s for m, s in zip(self.mass, profile.sizes)]

    def expand(self, profile: PartitionProfile) -> list[float]:
        """Per-secret probabilities for every secret (small profiles only)."""
        out = []
        for q, s in zip(self.per_secret(profile), profile.sizes):
            out.extend([q] * s)
        return out


@dataclass(frozen=True)
class GuesserMarginals:
    """Common inclusion probability of every secret of each partition."""

    rho: tuple[float, ...]

    def __post_init__(self):
        rho = tuple(float(r) for r in self.rho)
        for i, r in enumerate(rho):
            if not math.isfinite(r) or r < -PROB_TOL or r > 1 + PROB_TOL:
                raise GameSpecError(f"partition {i}: inclusion probability {r!r} outside [0, 1]")
        object.__setattr__(self, "rho", rho)

    def budget(self, profile: PartitionProfile) -> float:
        return math.fsum(s * r for s, r in zip(profile.sizes, self.rho))

    def check_budget(self, profile: PartitionProfile, cap: int, tol: float = PROB_TOL) -> None:
        b = self.budget(profile)
        if abs(b - cap) > tol * max(1.0, cap):
            raise GameSpecError(f"marginals spend {b!r} guesses, expected K={cap}")

    def expand(self, profile: PartitionProfile) -> list[float]:
        out = []
        for r, s in zip(self.rho, profile.sizes):
            out.extend([r] * s)
        return out


@dataclass(frozen=True)
class ExplorationPlan:
    """Ordered batches ``(partition, count)`` explored before quitting.

    The secrets of one partition are interchangeable, so a batch only says
    how many fresh secrets of that partition are tried next.  The empty
    plan is quitting immediately.
    """

    batches: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "batches", tuple((int(g), int(c)) for g, c in self.batches))

    @property
    def is_quit(self) -> bool:
        return not any(c for _, c in self.batches)

    @property
    def length(self) -> int:
        return sum(c for _, c in self.batches)

    def validate(self, profile: PartitionProfile) -> None:
        used = [0] * profile.n
        for g, c in self.batches:
            if not 0 <= g < profile.n:
                raise GameSpecError(f"plan references unknown partition {g}")
            if c < 0:
                raise GameSpecError(f"plan has negative count for partition {g}")
            used[g] += c
            if used[g] > profile.sizes[g]:
                raise GameSpecError(
                    f"plan explores {used[g]} secrets of partition {g}, which holds only {profile.sizes[g]}")

    @classmethod
    def full(cls, profile: PartitionProfile, upto: int | None = None) -> ExplorationPlan:
        """Exhaust partitions ``0 .. upto-1`` in cost order."""
        upto = profile.n if upto is None else upto
        return cls(tuple((i, profile.sizes[i]) for i in range(upto)))

    def to_list(self) -> list[dict]:
        return [{"partition": g, "count": c} for g, c in self.batches]


QUIT = ExplorationPlan()


@dataclass
class SolveReport:
    classification: str
    picker_strategy: PickerMix | None
    guesser_strategy: GuesserMarginals | ExplorationPlan | None
    picker_utility: float
    guesser_utility: float | None
    diagnostics: dict = field(default_factory=dict)


def eval_capped(profile: PartitionProfile, params: CappedParams, delta: PickerMix,
                rho: GuesserMarginals) -> tuple[float, float]:
    """Expected (picker, guesser) utility for marginal strategies."""
    usability = math.fsum(c * m for c, m in zip(profile.costs, delta.mass))
    # per-secret probability nu_i/|E_i| times |E_i| secrets collapses to nu_i
    hit = math.fsum(m * r for m, r in zip(delta.mass, rho.rho))
    return -usability - params.lam * hit, params.gamma * hit


def _batch_groups(profile: PartitionProfile, delta: PickerMix, plan: ExplorationPlan):
    plan.validate(profile)
    q = delta.per_secret(profile)
    return [(q[g], c) for g, c in plan.batches if c]


def eval_costly_plan(profile: PartitionProfile, params: CostlyParams, delta: PickerMix,
                     plan: ExplorationPlan) -> float:
    """Guesser utility of a plan: gain times hit mass minus cost of the tries actually made.

    Each batch of ``c`` secrets of per-secret mass ``q`` entered with
    remaining mass ``R`` costs ``sigma * (c*R - q*c*(c-1)/2)`` expected tries.
    """
    gain, tries, remaining = [], [], 1.0
    for q, c in _batch_groups(profile, delta, plan):
        gain.append(c * q)
        tries.append(c * remaining - q * c * (c - 1) / 2)
        remaining -= c * q
    return params.gamma * math.fsum(gain) - params.sigma * math.fsum(tries)


def eval_costly_plan_positional(profile: PartitionProfile, params: CostlyParams, delta: PickerMix,
                                plan: ExplorationPlan) -> float:
    """Same utility through the position form: sum of pos*prob plus length times miss mass."""
    found, weighted_pos, offset = [], [], 0
    for q, c in _batch_groups(profile, delta, plan):
        found.append(c * q)
        weighted_pos.append(q * (c * offset + c * (c + 1) / 2))
        offset += c
    hit = math.fsum(found)
    return params.gamma * hit - params.sigma * (math.fsum(weighted_pos) + offset * (1 - hit))


def exhaust_utility(set_size: int, params: CostlyParams) -> float:
    """Guesser value of exhausting a uniformly picked set of ``set_size`` secrets."""
    if set_size < 1:
        raise GameSpecError("set size must be at least 1")
    return params.gamma - (set_size + 1) * params.sigma / 2


def costly_picker_utility(profile: PartitionProfile, params: CostlyParams, delta: PickerMix,
                          plan: ExplorationPlan) -> float:
    usability = math.fsum(c * m for c, m in zip(profile.costs, delta.mass))
    hit = math.fsum(c * q for q, c in _batch_groups(profile, delta, plan))
    return -usability - params.lam * hit
