"""Per-assignment work statistics over a grid of random instances.

A sample is one assign-then-enforce event during MAC search, failed ones
included. Each search stops at its first solution (or exhausts its tree, or
the remaining budget); until ``samples`` assignments are collected the next
instance, generated from seed + 1, seed + 2, ..., tops the cell up. Timing
covers the enforcement call only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from . import kernel
from .generate import PRNG_NAME, GenConfig, generate
from .search import HEURISTIC, solve

DESK_VARS = (50, 100, 200)
DESK_DENSITIES = (0.1, 0.25, 0.5, 0.75, 1.0)
FULL_VARS = (100, 250, 500, 750, 1000)

CSV_COLUMNS = (
    "n", "density", "d", "tightness", "seed", "engine", "samples",
    "mean_revisions", "mean_recurrences", "mean_time_per_assignment_ms",
    "wipeout", "instances", "heuristic",
)
COUNTER_COLUMNS = ("n", "density", "d", "tightness", "seed", "engine", "samples",
                   "mean_revisions", "mean_recurrences", "wipeout", "instances")


@dataclass
class BenchRow:
    n: int
    density: float
    d: int
    tightness: float
    seed: int
    engine: str
    samples: int
    mean_revisions: float | None
    mean_recurrences: float | None
    mean_time_per_assignment_ms: float | None
    wipeout: bool = False
    instances: int = 1
    heuristic: str = HEURISTIC

    def counters(self) -> tuple:
        return tuple(getattr(self, c) for c in COUNTER_COLUMNS)


def run_cell(
    n: int,
    density: float,
    engine: str,
    *,
    d: int = 20,
    tightness: float = 0.3,
    seed: int = 0,
    samples: int = 2000,
    workers: int = 1,
    max_instances: int = 1000,
) -> BenchRow:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    work: list[int] = []
    seconds: list[float] = []
    wipeout = False
    instances = 0
    with kernel.workers(workers):
        while len(work) < samples and instances < max_instances:
            inst = generate(GenConfig(n, d, density, tightness, seed + instances))
            instances += 1
            result = solve(inst, engine, budget=samples - len(work))
            if result.stats.root is not None and result.stats.root.wipeout:
                wipeout = True
            for w, t in result.stats.per_assignment:
                work.append(w)
                seconds.append(t)
    taken = len(work)
    mean_work = sum(work) / taken if taken else math.nan
    mean_ms = 1000.0 * sum(seconds) / taken if taken else math.nan
    return BenchRow(
        n=n, density=density, d=d, tightness=tightness, seed=seed, engine=engine,
        samples=taken,
        mean_revisions=mean_work if engine == "ac3" else None,
        mean_recurrences=mean_work if engine == "rtac" else None,
        mean_time_per_assignment_ms=mean_ms,
        wipeout=wipeout, instances=instances,
    )


def _run_cell_kwargs(kwargs: dict) -> BenchRow:
    return run_cell(**kwargs)


def run_grid(
    vars_: Iterable[int] = DESK_VARS,
    densities: Iterable[float] = DESK_DENSITIES,
    engines: Sequence[str] = ("rtac", "ac3"),
    *,
    jobs: int = 1,
    **cell_kwargs,
) -> list[BenchRow]:
    """One row per (n, density, engine), in that nesting order."""
    cells = [dict(n=n, density=p, engine=e, **cell_kwargs)
             for n in vars_ for p in densities for e in engines]
    if jobs <= 1:
        return [run_cell(**c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell_kwargs, cells))


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json(rows: Iterable[BenchRow]) -> str:
    meta = {"heuristic": HEURISTIC, "prng": PRNG_NAME,
            "sample_unit": "one assignment plus its enforcement call",
            "recurrences_include_final_quiescent_iteration": True}
    payload = {"meta": meta, "rows": [
        {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(row).items()}
        for row in rows
    ]}
    return json.dumps(payload, indent=2) + "\n"
