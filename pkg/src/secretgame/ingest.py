"""Building partition profiles from frequency data and from key-length models."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .model import GameSpecError, PartitionProfile

LINEAR = "linear"
CUBIC = "cubic"


class IngestError(GameSpecError):
    pass


def profile_from_histogram(histogram: Mapping[int, int]) -> PartitionProfile:
    """``histogram`` maps an occurrence count to how many distinct secrets have it.

    One partition per distinct count, most frequent first; cost is the
    inverse frequency scaled so the rarest class costs 1.
    """
    if not histogram:
        raise IngestError("no frequency data")
    for count, mult in histogram.items():
        if count < 1:
            raise IngestError(f"non-positive count {count}")
        if mult < 1:
            raise IngestError(f"count {count}: non-positive multiplicity {mult}")
    counts = sorted(histogram, reverse=True)
    rarest = counts[-1]
    return PartitionProfile(tuple(histogram[c] for c in counts), tuple(rarest / c for c in counts))


def parse_frequency_lines(lines: Iterable[str], fmt: str = "auto") -> dict[int, int]:
    """Parse tab-separated frequency data into a count histogram.

    ``fmt`` is ``"histogram"`` (``<count>\\t<multiplicity>``), ``"raw"``
    (``<secret>\\t<count>``) or ``"auto"``, which reads the file as raw as
    soon as one first field is not an integer.  Purely numeric secrets make
    the two shapes indistinguishable, so pass ``fmt`` explicitly for them.
    """
    rows = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise IngestError(f"line {lineno}: expected two tab-separated fields, got {len(parts)}")
        rows.append((lineno, parts[0], parts[1].strip()))
    if not rows:
        raise IngestError("empty input")
    if fmt == "auto":
        fmt = "histogram" if all(_is_int(k) for _, k, _ in rows) else "raw"
    if fmt not in ("histogram", "raw"):
        raise IngestError(f"unknown format {fmt!r}")

    hist: Counter[int] = Counter()
    seen: set[str] = set()
    for lineno, key, value in rows:
        if not _is_int(value):
            raise IngestError(f"line {lineno}: count {value!r} is not an integer")
        v = int(value)
        if fmt == "raw":
            if v < 1:
                raise IngestError(f"line {lineno}: non-positive count {v}")
            if key in seen:
                raise IngestError(f"line {lineno}: duplicate secret {key!r}")
            seen.add(key)
            hist[v] += 1
        else:
            if not _is_int(key):
                raise IngestError(f"line {lineno}: count {key!r} is not an integer")
            k = int(key)
            if k < 1:
                raise IngestError(f"line {lineno}: non-positive count {k}")
            if v < 1:
                raise IngestError(f"line {lineno}: non-positive multiplicity {v}")
            hist[k] += v
    return dict(hist)


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def from_frequency_file(path: str | Path, fmt: str = "auto") -> PartitionProfile:
    with open(path, encoding="utf-8") as fh:
        return profile_from_histogram(parse_frequency_lines(fh, fmt))


def synthetic_key_model(max_bits: int, cost_shape: str = LINEAR) -> PartitionProfile:
    """Keys of every length 0..max_bits; length l has 2**l keys and cost (l/max_bits) or its cube."""
    if isinstance(max_bits, bool) or not isinstance(max_bits, int) or not 1 <= max_bits <= 64:
        raise IngestError(f"max_bits must be an integer in [1, 64], got {max_bits!r}")
    power = {LINEAR: 1, CUBIC: 3}.get(cost_shape)
    if power is None:
        raise IngestError(f"unknown cost shape {cost_shape!r}")
    return PartitionProfile(
        tuple(2 ** l for l in range(max_bits + 1)),
        tuple((l / max_bits) ** power for l in range(max_bits + 1)),
    )


def prune(profile: PartitionProfile, merge_tolerance: float) -> PartitionProfile:
    """Merge neighbours whose costs differ by less than ``merge_tolerance``.

    Single left-to-right pass; a merged class takes the size-weighted mean
    cost and is compared against its right neighbour with that cost.
    """
    if merge_tolerance < 0:
        raise IngestError("merge tolerance must be non-negative")
    sizes, costs = [profile.sizes[0]], [profile.costs[0]]
    for s, c in zip(profile.sizes[1:], profile.costs[1:]):
        if c - costs[-1] < merge_tolerance:
            total = sizes[-1] + s
            costs[-1] = (costs[-1] * sizes[-1] + c * s) / total
            sizes[-1] = total
        else:
            sizes.append(s)
            costs.append(c)
    # weighted means of near-ties can land on or below the left neighbour
    out_s, out_c = [sizes[0]], [costs[0]]
    for s, c in zip(sizes[1:], costs[1:]):
        if c <= out_c[-1]:
            total = out_s[-1] + s
            out_c[-1] = (out_c[-1] * out_s[-1] + c * s) / total
            out_s[-1] = total
        else:
            out_s.append(s)
            out_c.append(c)
    return PartitionProfile(tuple(out_s), tuple(out_c))


def rockyou_shaped_histogram(n_classes: int = 2040, max_count: int = 290729, singletons: int = 2459760,
                             distinct: int = 11884632, dense_tail: int = 1500,
                             exponent: float = 3.0) -> dict[int, int]:
    """Deterministic stand-in with the published shape of the RockYou frequency table.

    Counts 1..dense_tail are all present; the remaining classes are spread
    log-uniformly up to ``max_count``.  ``singletons`` secrets occur once and
    the multiplicity of larger counts falls off as count**-exponent, scaled
    so that about ``distinct`` secrets exist in total, with at least one
    secret per class.
    """
    n_high = n_classes - dense_tail
    if n_high < 1:
        raise IngestError("need more classes than the dense tail")
    high = np.geomspace(dense_tail + 1, max_count, n_high)
    counts = list(range(1, dense_tail + 1))
    for x in high:
        counts.append(max(int(round(x)), counts[-1] + 1))
    if counts[-1] != max_count:
        counts[-1] = max_count
        for k in range(len(counts) - 2, dense_tail - 1, -1):
            if counts[k] >= counts[k + 1]:
                counts[k] = counts[k + 1] - 1
    rest = np.array(counts[1:], dtype=float)
    weight = rest ** -exponent
    # classes floored at one secret are paid for before scaling the others
    scale = (distinct - singletons) / weight.sum()
    floored = scale * weight < 0.5
    scale = (distinct - singletons - floored.sum()) / weight[~floored].sum()
    mult = np.maximum(1, np.round(scale * weight)).astype(int)
    return {1: singletons, **{c: int(m) for c, m in zip(counts[1:], mult)}}
