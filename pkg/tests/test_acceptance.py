"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary.

Run alone with ``pytest -m acceptance``. The desk-scale bench grid dominates
the runtime (roughly ten minutes on one core).
"""

import itertools
import operator
from dataclasses import dataclass

import numpy as np
import pytest

from helpers import EQ2, PATH3, WIPE2, prop2_violations, random_configs, tiny_configs
from rtac import kernel as K
from rtac.ac3 import AC3
from rtac.bench import DESK_DENSITIES, DESK_VARS, run_grid
from rtac.engine import EnforceStats, Inconsistent, TensorAC
from rtac.generate import generate
from rtac.kernel import Tensor
from rtac.model import CspInstance, build_tensors
from rtac.oracle import enumerate_solutions, fixpoint_ac, is_arc_consistent
from rtac.search import Status, solve

pytestmark = pytest.mark.acceptance

CORPUS_SIZE = 1000
DESK_SAMPLES = 2000
STEP_FRACTION = 0.8  # share of steps along an axis that must follow the trend


@dataclass
class Outcome:
    domains: Tensor | None  # None on wipeout
    stats: EnforceStats


def enforce(engine, domains, changed) -> Outcome:
    try:
        return Outcome(*engine.enforce(domains, changed))
    except Inconsistent as exc:
        return Outcome(None, exc.stats)


@dataclass
class CorpusRun:
    inst: CspInstance
    rtac: Outcome
    ac3: Outcome
    oracle: Tensor
    oracle_removed: set


@pytest.fixture(scope="module")
def corpus() -> list[CorpusRun]:
    runs = []
    for cfg in random_configs(CORPUS_SIZE, seed=20240601, n_range=(2, 20), d_range=(1, 6),
                              density_range=(0.1, 1.0), tightness_range=(0.0, 0.9)):
        inst = generate(cfg)
        dom = build_tensors(inst)[0]
        fix, trace = fixpoint_ac(inst)
        runs.append(CorpusRun(inst,
                              enforce(TensorAC(inst, trace=True), dom, range(inst.n)),
                              enforce(AC3(inst), dom, range(inst.n)),
                              fix, trace.removed))
    return runs


def test_oracle_equivalence(corpus):
    assert len(corpus) >= 1000
    wipeouts = 0
    for run in corpus:
        wiped = not run.oracle.array.any(axis=1).all()
        wipeouts += wiped
        assert (run.rtac.domains is None) == (run.ac3.domains is None) == wiped
        if not wiped:
            assert run.rtac.domains == run.ac3.domains == run.oracle
    # The corpus must exercise both outcomes.
    assert 0 < wipeouts < len(corpus)


def test_proposition_suite(corpus):
    violations = []
    for i, run in enumerate(corpus):
        removed = set().union(*run.rtac.stats.removed_per_iteration)
        if not removed <= run.oracle_removed:
            violations.append(f"#{i} soundness: {sorted(removed - run.oracle_removed)[:3]}")
        if run.rtac.domains is not None and not is_arc_consistent(run.inst, run.rtac.domains):
            violations.append(f"#{i} fixpoint is not arc consistent")
        full = {(x, a) for x in range(run.inst.n) for a in range(run.inst.d)}
        violations += [f"#{i} {p}" for p in prop2_violations(run.inst, full, run.rtac.stats.removed_per_iteration)]
    assert violations == []


def test_micro_instances():
    checks = {}
    dom = build_tensors(EQ2)[0]
    out, rs = TensorAC(EQ2).enforce(dom, [0, 1])
    _, ac = AC3(EQ2).enforce(dom, [0, 1])
    checks["EQ2"] = (out.tolist(), rs.total_removed, rs.recurrences, ac.revisions)
    dom = build_tensors(PATH3)[0]
    out, rs = TensorAC(PATH3).enforce(dom, [0, 1, 2])
    out3, ac = AC3(PATH3).enforce(dom, [0, 1, 2])
    checks["PATH3"] = (out.tolist(), out3.tolist(), rs.recurrences, ac.revisions)
    dom = build_tensors(WIPE2)[0]
    raised = []
    for engine in (TensorAC(WIPE2), AC3(WIPE2)):
        with pytest.raises(Inconsistent):
            engine.enforce(dom, [0, 1])
        raised.append(True)
    checks["WIPE2"] = raised
    # Fixtures must agree with the oracle before being compared with frozen values.
    assert fixpoint_ac(EQ2)[0].tolist() == [[1, 0], [1, 0]]
    assert fixpoint_ac(PATH3)[0].tolist() == [[1, 0]] * 3
    assert not fixpoint_ac(WIPE2)[0].array.any()
    assert checks == {
        "EQ2": ([[1, 0], [1, 0]], 2, 2, 3),
        "PATH3": ([[1, 0]] * 3, [[1, 0]] * 3, 3, 6),
        "WIPE2": [True, True],
    }


@pytest.fixture(scope="module")
def desk_grid():
    rows = run_grid(DESK_VARS, DESK_DENSITIES, ("rtac", "ac3"), d=20, tightness=0.3,
                    seed=0, samples=DESK_SAMPLES, workers=1)
    table = {(r.engine, r.n, r.density): r for r in rows}
    print("\ndesk grid (n, density): mean recurrences / mean revisions")
    for n, p in itertools.product(DESK_VARS, DESK_DENSITIES):
        print(f"  {n:4d} {p:5.2f}  {table['rtac', n, p].mean_recurrences:8.3f}"
              f"  {table['ac3', n, p].mean_revisions:10.1f}")
    return table


def step_fraction(values, ok) -> float:
    steps = list(zip(values, values[1:]))
    return sum(ok(a, b) for a, b in steps) / len(steps)


def test_recurrence_trend(desk_grid):
    problems = []
    for n in DESK_VARS:
        series = [desk_grid["rtac", n, p] for p in DESK_DENSITIES]
        for row in series:
            if row.samples < DESK_SAMPLES:
                problems.append(f"n={n} p={row.density}: only {row.samples} samples")
            if not 2 <= row.mean_recurrences <= 8:
                problems.append(f"n={n} p={row.density}: mean {row.mean_recurrences:.3f} outside [2, 8]")
        means = [r.mean_recurrences for r in series]
        if step_fraction(means, operator.ge) < STEP_FRACTION:
            problems.append(f"n={n}: not non-increasing across density {[round(m, 3) for m in means]}")
    assert problems == []


def test_revision_trend(desk_grid):
    problems = []
    for n in DESK_VARS:
        means = [desk_grid["ac3", n, p].mean_revisions for p in DESK_DENSITIES]
        if step_fraction(means, operator.lt) < STEP_FRACTION:
            problems.append(f"n={n}: not increasing across density {[round(m, 1) for m in means]}")
    for p in DESK_DENSITIES:
        means = [desk_grid["ac3", n, p].mean_revisions for n in DESK_VARS]
        if step_fraction(means, operator.lt) < STEP_FRACTION:
            problems.append(f"p={p}: not increasing across n {[round(m, 1) for m in means]}")
    assert problems == []


def test_determinism_under_parallelism():
    configs = random_configs(40, seed=777, n_range=(5, 40), d_range=(2, 8))
    per_count = {}
    for count in (1, 2, 8):
        with K.workers(count):
            results = []
            for cfg in configs:
                inst = generate(cfg)
                dom = build_tensors(inst)[0]
                for engine in (TensorAC(inst, trace=True), AC3(inst)):
                    out = enforce(engine, dom, range(inst.n))
                    results.append((None if out.domains is None else out.domains.array.tobytes(), out.stats))
            rows = run_grid((30,), (0.25, 1.0), ("rtac", "ac3"), d=10, seed=5, samples=150, workers=count)
            per_count[count] = (results, [r.counters() for r in rows])
    assert per_count[1] == per_count[2] == per_count[8]


def loop_sum(arr, axis):
    out = np.zeros(arr.shape[:axis] + arr.shape[axis + 1:], dtype=np.int64)
    for idx in itertools.product(*(range(s) for s in arr.shape)):
        out[idx[:axis] + idx[axis + 1:]] += int(arr[idx])
    return out


def loop_matvec(a, v):
    n, k, rows, cols = a.shape
    out = np.zeros((n, k, rows, 1), dtype=np.int64)
    for i, j, r in itertools.product(range(n), range(k), range(rows)):
        out[i, j, r, 0] = sum(int(a[i, j, r, c]) * int(v[j, c, 0]) for c in range(cols))
    return out


def test_kernel_oracles():
    rng = np.random.default_rng(99)
    for _ in range(500):
        shape = tuple(int(s) for s in rng.integers(1, 9, size=rng.integers(1, 5)))
        arr = rng.integers(0, 100, size=shape)
        axis = int(rng.integers(0, len(shape)))
        assert np.array_equal(K.sum_along(Tensor(arr), axis).array, loop_sum(arr, axis))
    for _ in range(500):
        n, k, d = (int(s) for s in rng.integers(1, 9, size=3))
        a = rng.integers(0, 2, size=(n, k, d, d))
        v = rng.integers(0, 50, size=(k, d, 1))
        assert np.array_equal(K.batched_matvec(Tensor(a), Tensor(v)).array, loop_matvec(a, v))
    for _ in range(200):
        shape = tuple(int(s) for s in rng.integers(1, 6, size=rng.integers(0, 5)))
        t = Tensor(rng.integers(0, 1000, size=shape))
        dim = int(rng.integers(-(len(shape) + 1), len(shape) + 1))
        expanded = K.dim_expand(t, dim)
        assert expanded.rank == t.rank + 1
        assert K.dim_reduct(expanded, dim) == t


def test_search_correctness():
    mismatches = []
    for i, cfg in enumerate(tiny_configs(200, seed=31337, max_space=10**5)):
        inst = generate(cfg)
        assert inst.d ** inst.n <= 10**5
        has_solution = bool(enumerate_solutions(inst, limit=1))
        for engine in ("rtac", "ac3"):
            result = solve(inst, engine)
            if (result.status == Status.SOLUTION) != has_solution:
                mismatches.append((i, engine, result.status))
            elif has_solution and not inst.satisfies(result.solution):
                mismatches.append((i, engine, "invalid solution"))
    assert mismatches == []
