"""Solve both games on a profile built from a frequency file.

Without an input file the RockYou-shaped stand-in histogram is used.  The
game file, a capped sweep over the cap and a single commitment solve are
written to the output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from secretgame import CostlyParams, from_frequency_file, prune, solve_sse, sweep_capped
from secretgame.cli import CAPPED_SWEEP_COLUMNS
from secretgame.ingest import profile_from_histogram, rockyou_shaped_histogram


@dataclass
class Config:
    input: Path | None = None
    fmt: str = "auto"
    prune_tolerance: float = 0.0
    lam: float = 2.0
    gamma: float = 1000.0
    sigma: float = 1.0
    cap_points: int = 200
    out_dir: Path = Path("results")


def run(cfg: Config) -> dict:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.input is None:
        profile = profile_from_histogram(rockyou_shaped_histogram())
    else:
        profile = from_frequency_file(cfg.input, cfg.fmt)
    if cfg.prune_tolerance > 0:
        profile = prune(profile, cfg.prune_tolerance)
    (cfg.out_dir / "game.json").write_text(profile.to_json(indent=2) + "\n", encoding="utf-8")

    caps = sorted({int(round(x)) for x in np.geomspace(1, profile.total - 1, cfg.cap_points)})
    rows = sweep_capped(profile, cfg.lam, 1.0, caps)
    with open(cfg.out_dir / "capped_sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, CAPPED_SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    rep = solve_sse(profile, CostlyParams(cfg.lam, cfg.gamma, cfg.sigma))
    summary = {
        "partitions": profile.n,
        "secrets": profile.total,
        "sse_classification": rep.classification,
        "sse_picker_utility": rep.picker_utility,
        "lp_iterations": rep.diagnostics.get("lp_iterations"),
        "uniform_blend": rep.diagnostics.get("uniform_blend"),
    }
    (cfg.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("input", nargs="?", type=Path)
    p.add_argument("--format", dest="fmt", choices=["auto", "histogram", "raw"], default="auto")
    p.add_argument("--prune", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=Config.lam)
    p.add_argument("--gamma", type=float, default=Config.gamma)
    p.add_argument("--sigma", type=float, default=Config.sigma)
    p.add_argument("--out-dir", type=Path, default=Config.out_dir)
    args = p.parse_args()
    cfg = Config(args.input, args.fmt, args.prune, args.lam, args.gamma, args.sigma, Config.cap_points, args.out_dir)
    print(json.dumps(run(cfg), indent=2))


if __name__ == "__main__":
    main()
