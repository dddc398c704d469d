"""Command-line front end.

Exit codes: 0 success, 1 solver or verification failure, 2 bad usage or
input.  Reports go to stdout as JSON (floats in shortest round-trip form)
or CSV with a header row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

import numpy as np

from . import capped, costly, ingest, oracle
from .capped import SolverError
from .model import (
    CappedParams,
    CostlyParams,
    ExplorationPlan,
    GameSpecError,
    PartitionProfile,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

CAPPED_SWEEP_COLUMNS = ["K", "classification", "picker_utility", "picker_loss", "support_size",
                        "find_probability", "error"]
COSTLY_SWEEP_COLUMNS = ["gamma_sigma", "gamma", "sigma", "ne_regime", "ne_M", "ne_loss", "ne_loss_is_bound",
                        "sse_classification", "sse_loss", "error"]

# per-secret expansion of the commitment is only printed for small spaces
EXPAND_LIMIT = 10_000


class UsageError(Exception):
    pass


def load_game(path: str) -> PartitionProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read game file {path}: {exc.strerror}") from None
    return PartitionProfile.from_json(text)


def _dump(obj, out) -> None:
    json.dump(obj, out, indent=2, allow_nan=False)
    out.write("\n")


def _plan(strategy):
    if isinstance(strategy, ExplorationPlan):
        return {"quit": strategy.is_quit, "batches": strategy.to_list(), "length": strategy.length}
    return None


def capped_report(profile: PartitionProfile, params: CappedParams) -> dict:
    rep = capped.solve_ne(profile, params)
    check = capped.verify_ne(profile, params, rep.picker_strategy, rep.guesser_strategy)
    d = rep.diagnostics
    out = {
        "classification": rep.classification,
        "L": d["L"],
        "J_set": d["J_set"],
        "J": d["J"],
        "support_partitions": d["support_partitions"],
        "degenerate": d["degenerate"],
        "delta": list(rep.picker_strategy.mass),
        "rho": list(rep.guesser_strategy.rho),
        "B": d["B"],
        "picker_utility": rep.picker_utility,
        "guesser_utility": rep.guesser_utility,
        "notes": d["notes"],
        "equilibrium_check": {"ok": check.ok, "certificate": check.certificate},
    }
    for key in ("deterrence_set", "thresholds", "eta", "slack"):
        if key in d:
            out[key] = d[key]
    if not check.ok:
        raise SolverError(f"solution failed its equilibrium check: {check.certificate}")
    return out


def costly_report(profile: PartitionProfile, params: CostlyParams, mode: str) -> dict:
    if mode == "ne":
        rep = costly.solve_ne(profile, params)
        d = rep.diagnostics
        out = {"mode": "ne", "regime": d["regime"], "M": d["M"], "boundary": d["boundary"]}
        if rep.classification == costly.BOUNDED:
            out["utility_upper_bound"] = d["utility_upper_bound"]
        else:
            out.update(picker_utility=rep.picker_utility, guesser_utility=rep.guesser_utility,
                       delta=list(rep.picker_strategy.mass), guesser_plan=_plan(rep.guesser_strategy))
        return out
    rep = costly.solve_sse(profile, params)
    d = rep.diagnostics
    per_secret = rep.picker_strategy.per_secret(profile)
    out = {
        "mode": "sse",
        "classification": rep.classification,
        "nu": list(rep.picker_strategy.mass),
        "delta_per_secret": per_secret,
        "picker_utility": rep.picker_utility,
        "guesser_utility": rep.guesser_utility,
        "guesser_plan": _plan(rep.guesser_strategy),
        "boundary": d["boundary"],
        "lp_status": d.get("lp_status"),
        "lp_iterations": d.get("lp_iterations"),
        "binding_constraints": d.get("binding_constraints"),
        "deterrence_certificate": d.get("deterrence_certificate"),
    }
    if profile.total <= EXPAND_LIMIT:
        out["delta_expanded"] = rep.picker_strategy.expand(profile)
    return out


def _partition_csv(profile: PartitionProfile, report: dict, columns: list[str], out) -> None:
    head = {k: report[k] for k in report if not isinstance(report[k], (list, dict)) and report[k] is not None}
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["partition", "size", "cost", *columns, *head])
    for i, (s, c) in enumerate(zip(profile.sizes, profile.costs)):
        vals = []
        for col in columns:
            seq = report.get(col)
            vals.append(repr(seq[i]) if seq is not None and i < len(seq) else "")
        writer.writerow([i + 1, s, repr(c), *vals, *[_cell(v) for v in head.values()]])


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def cmd_solve_capped(args, out) -> int:
    profile = load_game(args.game)
    params = CappedParams(args.lam, args.gamma, args.cap)
    params.check(profile)
    report = capped_report(profile, params)
    if args.format == "csv":
        _partition_csv(profile, report, ["delta", "rho", "B"], out)
    else:
        _dump(report, out)
    return EXIT_OK


def cmd_solve_costly(args, out) -> int:
    profile = load_game(args.game)
    params = CostlyParams(args.lam, args.gamma, args.sigma)
    report = costly_report(profile, params, args.mode)
    if args.format == "csv":
        cols = ["delta"] if args.mode == "ne" else ["nu", "delta_per_secret"]
        _partition_csv(profile, report, cols, out)
    else:
        _dump(report, out)
    return EXIT_OK


def thread_count() -> int:
    raw = os.environ.get("SECRETGAME_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"SECRETGAME_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"SECRETGAME_THREADS must be a positive integer, got {raw!r}")
    return n


def cap_grid(lo: float, hi: float, steps: int | None) -> list[int]:
    lo_i, hi_i = int(lo), int(hi)
    if lo_i != lo or hi_i != hi or lo_i < 1 or hi_i < lo_i:
        raise UsageError("cap axis needs integer bounds with 1 <= from <= to")
    if steps is None:
        return list(range(lo_i, hi_i + 1))
    return sorted({int(round(x)) for x in np.linspace(lo_i, hi_i, steps)})


def ratio_grid(lo: float, hi: float, steps: int, log: bool) -> list[float]:
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise UsageError("gamma_sigma axis needs 0 < from <= to")
    grid = np.geomspace(lo, hi, steps) if log else np.linspace(lo, hi, steps)
    return [float(x) for x in grid]


def costly_sweep_row(profile: PartitionProfile, lam: float, sigma: float, ratio: float) -> dict:
    gamma = ratio * sigma
    row = {"gamma_sigma": ratio, "gamma": gamma, "sigma": sigma, "ne_regime": "", "ne_M": "",
           "ne_loss": math.nan, "ne_loss_is_bound": "", "sse_classification": "", "sse_loss": math.nan,
           "error": ""}
    try:
        params = CostlyParams(lam, gamma, sigma)
        ne = costly.solve_ne(profile, params)
        row.update(ne_regime=ne.classification, ne_M=ne.diagnostics["M"] or "",
                   ne_loss=-ne.picker_utility, ne_loss_is_bound=ne.classification == costly.BOUNDED)
        sse = costly.solve_sse(profile, params)
        row.update(sse_classification=sse.classification, sse_loss=-sse.picker_utility)
    except (GameSpecError, SolverError) as exc:
        row["error"] = str(exc)
    return row


def cmd_sweep(args, out) -> int:
    profile = load_game(args.game)
    if args.steps is not None and args.steps < 1:
        raise UsageError("--steps must be positive")
    workers = thread_count()
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    with pool or nullcontext():
        if args.axis == "cap":
            if args.lam is None:
                raise UsageError("cap sweep needs --lambda")
            caps = cap_grid(args.start, args.stop, args.steps)
            rows = capped.sweep_capped(profile, args.lam, args.gamma, caps, executor=pool)
            columns = CAPPED_SWEEP_COLUMNS
        else:
            if args.lam is None:
                raise UsageError("gamma_sigma sweep needs --lambda")
            if not args.sigma > 0:
                raise UsageError("--sigma must be positive")
            ratios = ratio_grid(args.start, args.stop, args.steps or 50, args.log)
            mapper = pool.map if pool is not None else map
            rows = list(mapper(lambda r: costly_sweep_row(profile, args.lam, args.sigma, r), ratios))
            columns = COSTLY_SWEEP_COLUMNS
    with (open(args.out, "w", newline="", encoding="utf-8") if args.out else nullcontext(out)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])
    return EXIT_OK


def cmd_ingest(args, out) -> int:
    if args.mode == "keys":
        if args.max_bits is None:
            raise UsageError("--mode keys needs --max-bits")
        profile = ingest.synthetic_key_model(args.max_bits, args.cost)
    else:
        if args.input is None:
            raise UsageError("--mode freq needs an input file")
        if args.input == "-":
            profile = ingest.profile_from_histogram(ingest.parse_frequency_lines(sys.stdin, args.format))
        else:
            try:
                profile = ingest.from_frequency_file(args.input, args.format)
            except OSError as exc:
                raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    if args.prune is not None:
        profile = ingest.prune(profile, args.prune)
    text = profile.to_json(indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.instances < 1:
        raise UsageError("--instances must be at least 1")
    summary = oracle.run_verification(args.seed, args.instances, args.max_capped_size, args.max_sequence_size)
    _dump(summary, out)
    return EXIT_OK if summary["ok"] else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="secretgame", description="Solve picker/guesser secret games.")
    sub = p.add_subparsers(dest="command", required=True)

    sc = sub.add_parser("solve-capped", help="equilibrium of the capped-guesses game")
    sc.add_argument("game", help="JSON game file")
    sc.add_argument("--lambda", dest="lam", type=float, required=True)
    sc.add_argument("--gamma", type=float, default=1.0)
    sc.add_argument("--cap", type=int, required=True)
    sc.add_argument("--format", choices=["json", "csv"], default="json")
    sc.set_defaults(func=cmd_solve_capped)

    so = sub.add_parser("solve-costly", help="equilibrium regime or optimal commitment of the costly-guesses game")
    so.add_argument("game")
    so.add_argument("--lambda", dest="lam", type=float, required=True)
    so.add_argument("--gamma", type=float, required=True)
    so.add_argument("--sigma", type=float, required=True)
    so.add_argument("--mode", choices=["ne", "sse"], default="sse")
    so.add_argument("--format", choices=["json", "csv"], default="json")
    so.set_defaults(func=cmd_solve_costly)

    sw = sub.add_parser("sweep", help="solve over a grid of caps or gamma/sigma ratios, CSV out")
    sw.add_argument("game")
    sw.add_argument("--axis", choices=["cap", "gamma_sigma"], required=True)
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--steps", type=int, default=None,
                    help="grid points (cap axis: default every integer; gamma_sigma: default 50)")
    sw.add_argument("--log", action="store_true", help="geometric gamma/sigma grid")
    sw.add_argument("--lambda", dest="lam", type=float)
    sw.add_argument("--gamma", type=float, default=1.0, help="guesser gain for the cap axis")
    sw.add_argument("--sigma", type=float, default=1.0, help="guess cost for the gamma_sigma axis")
    sw.add_argument("--out", help="CSV path (default stdout)")
    sw.set_defaults(func=cmd_sweep)

    ig = sub.add_parser("ingest", help="build a game file from frequency data or a key-length model")
    ig.add_argument("input", nargs="?", help="frequency file, or - for stdin (freq mode)")
    ig.add_argument("--mode", choices=["freq", "keys"], required=True)
    ig.add_argument("--format", choices=["auto", "histogram", "raw"], default="auto")
    ig.add_argument("--max-bits", type=int)
    ig.add_argument("--cost", choices=[ingest.LINEAR, ingest.CUBIC], default=ingest.LINEAR)
    ig.add_argument("--prune", type=float, help="merge neighbouring classes closer than this in cost")
    ig.add_argument("--out", help="game file path (default stdout)")
    ig.set_defaults(func=cmd_ingest)

    vf = sub.add_parser("verify", help="check the solvers against brute-force oracles")
    vf.add_argument("--seed", type=int, default=0)
    vf.add_argument("--instances", type=int, default=200)
    vf.add_argument("--max-capped-size", type=int, default=oracle.MAX_NE_SECRETS)
    vf.add_argument("--max-sequence-size", type=int, default=oracle.MAX_SEQUENCE_SECRETS)
    vf.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (UsageError, GameSpecError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=err)
        return EXIT_FAILURE
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
