"""Command line: ``rtac {gen,ac,solve,bench}``.

Exit codes: 0 ok / consistent / solved, 1 inconsistent / unsat, 2 usage or
parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import bench, kernel
from .ac3 import AC3
from .engine import Inconsistent, TensorAC
from .generate import GenConfig, generate
from .model import InstanceError, dumps, full_domains, read_instance
from .oracle import fixpoint_ac
from .search import solve

EXIT_OK, EXIT_INCONSISTENT, EXIT_USAGE = 0, 1, 2


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _default_workers() -> int:
    raw = os.environ.get("RTAC_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtac", description="Recurrent tensor arc consistency toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random binary CSP instance")
    gen.add_argument("--vars", type=_positive, required=True)
    gen.add_argument("--dom", type=_positive, default=20)
    gen.add_argument("--density", type=_probability, default=0.5)
    gen.add_argument("--tightness", type=_probability, default=0.3)
    gen.add_argument("--seed", type=_seed, default=0)
    gen.add_argument("-o", "--out", help="output path (stdout if omitted)")

    ac = sub.add_parser("ac", help="enforce arc consistency on an instance file")
    ac.add_argument("instance")
    ac.add_argument("--engine", choices=("rtac", "ac3", "oracle"), default="rtac")
    ac.add_argument("--workers", type=_positive, default=_default_workers())

    sol = sub.add_parser("solve", help="MAC backtracking search on an instance file")
    sol.add_argument("instance")
    sol.add_argument("--engine", choices=("rtac", "ac3"), default="rtac")
    sol.add_argument("--samples", "--budget", dest="budget", type=_positive, default=None,
                     help="assignment budget")
    sol.add_argument("--workers", type=_positive, default=_default_workers())

    b = sub.add_parser("bench", help="per-assignment statistics over a grid of random instances")
    b.add_argument("--vars", type=_positive, nargs="+", default=list(bench.DESK_VARS))
    b.add_argument("--density", type=_probability, nargs="+", default=list(bench.DESK_DENSITIES))
    b.add_argument("--dom", type=_positive, default=20)
    b.add_argument("--tightness", type=_probability, default=0.3)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--engine", choices=("rtac", "ac3"), nargs="+", default=["rtac", "ac3"])
    b.add_argument("--samples", type=_positive, default=2000)
    b.add_argument("--workers", type=_positive, default=_default_workers())
    b.add_argument("--jobs", type=_positive, default=1, help="grid cells run in parallel processes")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("-o", "--out", help="output path (stdout if omitted)")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    cfg = GenConfig(args.vars, args.dom, args.density, args.tightness, args.seed)
    text = dumps(generate(cfg), cfg.metadata())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ac(args) -> int:
    inst, _ = read_instance(args.instance)
    start = time.perf_counter()
    report: dict = {"engine": args.engine}
    if args.engine == "oracle":
        domains, trace = fixpoint_ac(inst)
        consistent = bool(domains.array.any(axis=1).all())
        report.update(consistent=consistent, removed=len(trace.removed))
    else:
        enforcer = TensorAC(inst) if args.engine == "rtac" else AC3(inst)
        counter = "recurrences" if args.engine == "rtac" else "revisions"
        with kernel.workers(args.workers):
            try:
                _, stats = enforcer.enforce(full_domains(inst), range(inst.n))
                consistent = True
            except Inconsistent as exc:
                stats, consistent = exc.stats, False
        report.update(consistent=consistent, removed=stats.total_removed)
        report[counter] = getattr(stats, counter)
    report["time"] = time.perf_counter() - start
    print(json.dumps(report))
    return EXIT_OK if consistent else EXIT_INCONSISTENT


def cmd_solve(args) -> int:
    inst, _ = read_instance(args.instance)
    start = time.perf_counter()
    with kernel.workers(args.workers):
        result = solve(inst, args.engine, budget=args.budget)
    report = {
        "status": result.status.value,
        "solution": list(result.solution) if result.solution is not None else None,
        "assignments": result.stats.assignments,
        "engine": args.engine,
        "time": time.perf_counter() - start,
    }
    print(json.dumps(report))
    return EXIT_INCONSISTENT if result.status == "unsat" else EXIT_OK


def cmd_bench(args) -> int:
    rows = bench.run_grid(
        args.vars, args.density, args.engine, jobs=args.jobs,
        d=args.dom, tightness=args.tightness, seed=args.seed,
        samples=args.samples, workers=args.workers,
    )
    _emit(bench.to_csv(rows) if args.format == "csv" else bench.to_json(rows), args.out)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "ac": cmd_ac, "solve": cmd_solve, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InstanceError, OSError) as exc:
        print(f"rtac {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
