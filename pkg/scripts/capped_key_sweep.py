"""Capped-guesses equilibrium on the key-length model as a function of the guess cap.

Writes one CSV per cost shape with the loss, support size and find
probability for a log-spaced grid of caps.
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from secretgame import sweep_capped, synthetic_key_model
from secretgame.cli import CAPPED_SWEEP_COLUMNS
from secretgame.ingest import CUBIC, LINEAR


@dataclass
class Config:
    max_bits: int = 16
    lam: float = 1000.0
    gamma: float = 1.0
    points: int = 400
    out_dir: Path = Path("results")


def cap_grid(total: int, points: int) -> list[int]:
    return sorted({int(round(x)) for x in np.geomspace(1, total - 1, points)})


def run(cfg: Config) -> list[Path]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for shape in (LINEAR, CUBIC):
        profile = synthetic_key_model(cfg.max_bits, shape)
        rows = sweep_capped(profile, cfg.lam, cfg.gamma, cap_grid(profile.total, cfg.points))
        path = cfg.out_dir / f"capped_keys_{cfg.max_bits}bit_{shape}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, CAPPED_SWEEP_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        written.append(path)
    return written


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-bits", type=int, default=Config.max_bits)
    p.add_argument("--lambda", dest="lam", type=float, default=Config.lam)
    p.add_argument("--points", type=int, default=Config.points)
    p.add_argument("--out-dir", type=Path, default=Config.out_dir)
    args = p.parse_args()
    for path in run(Config(args.max_bits, args.lam, 1.0, args.points, args.out_dir)):
        print(path)


if __name__ == "__main__":
    main()
