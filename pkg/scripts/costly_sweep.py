"""Costly-guesses picker loss in equilibrium and under commitment against gamma/sigma.

Covers the RockYou-shaped password profile and the key-length model with
linear and cubic costs.  Each commitment LP on the 2040-class password
profile takes a few seconds, so its grid is coarser by default.
"""

from __future__ import annotations

import argparse
import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from secretgame import synthetic_key_model
from secretgame.cli import COSTLY_SWEEP_COLUMNS, costly_sweep_row
from secretgame.ingest import CUBIC, LINEAR, profile_from_histogram, rockyou_shaped_histogram


@dataclass
class Config:
    lam: float = 2.0
    sigma: float = 1.0
    key_bits: int = 16
    key_points: int = 80
    password_points: int = 16
    out_dir: Path = Path("results")


def write(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, COSTLY_SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def sweep(profile, cfg: Config, lo: float, hi: float, points: int) -> list[dict]:
    return [costly_sweep_row(profile, cfg.lam, cfg.sigma, float(r)) for r in np.geomspace(lo, hi, points)]


def run(cfg: Config) -> list[Path]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for shape in (LINEAR, CUBIC):
        profile = synthetic_key_model(cfg.key_bits, shape)
        path = cfg.out_dir / f"costly_keys_{cfg.key_bits}bit_{shape}.csv"
        write(path, sweep(profile, cfg, 0.1, 10 * profile.total, cfg.key_points))
        written.append(path)
    profile = profile_from_histogram(rockyou_shaped_histogram())
    start = time.perf_counter()
    rows = sweep(profile, cfg, 0.1, 10 * profile.total, cfg.password_points)
    path = cfg.out_dir / "costly_passwords.csv"
    write(path, rows)
    print(f"password sweep: {len(rows)} points in {time.perf_counter() - start:.1f} s")
    written.append(path)
    return written


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lambda", dest="lam", type=float, default=Config.lam)
    p.add_argument("--key-bits", type=int, default=Config.key_bits)
    p.add_argument("--key-points", type=int, default=Config.key_points)
    p.add_argument("--password-points", type=int, default=Config.password_points)
    p.add_argument("--out-dir", type=Path, default=Config.out_dir)
    args = p.parse_args()
    cfg = Config(args.lam, 1.0, args.key_bits, args.key_points, args.password_points, args.out_dir)
    for path in run(cfg):
        print(path)


if __name__ == "__main__":
    main()
