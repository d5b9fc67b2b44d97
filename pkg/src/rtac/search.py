"""Backtracking search that maintains arc consistency after every assignment.

Nodes carry their own copy of the domain matrix, so abandoning a subtree is
just dropping its copy. Variable choice is min-domain with the smallest index
breaking ties; values are tried in ascending order.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from . import kernel as K
from .ac3 import AC3
from .engine import EnforceStats, Inconsistent, TensorAC
from .kernel import Tensor
from .model import CspInstance, DomainMatrix, full_domains

HEURISTIC = "min-domain, lowest index"
ENGINES = ("rtac", "ac3")


class Status(str, enum.Enum):
    SOLUTION = "solution"
    UNSAT = "unsat"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class SearchStats:
    assignments: int = 0
    per_assignment: list[tuple[int, float]] = field(default_factory=list)  # (work, seconds)
    solutions_found: int = 0
    root: EnforceStats | None = None


@dataclass
class SearchResult:
    status: Status
    solution: tuple[int, ...] | None
    stats: SearchStats


@dataclass
class SearchNode:
    level: int
    domains: DomainMatrix
    assignment: dict[int, int]
    var: int = -1
    values: Iterator[int] | None = None


def make_engine(inst: CspInstance, engine: str):
    if engine == "rtac":
        return TensorAC(inst)
    if engine == "ac3":
        return AC3(inst)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def assign(domains: DomainMatrix, idx: int, val: int) -> DomainMatrix:
    """Copy of ``domains`` with row ``idx`` reduced to the single value ``val``."""
    if not domains.array[idx, val]:
        raise ValueError(f"value {val} is not in the domain of variable {idx}")
    out = domains.array.copy()
    out[idx] = 0
    out[idx, val] = 1
    return Tensor._wrap(out)


def heuristics(domains: DomainMatrix, assignment: Mapping[int, int]) -> int:
    """Unassigned variable with the smallest domain; ties go to the lowest index."""
    sizes = K.sum_along(domains, 1).array.astype(np.int64)
    if assignment:
        sizes[list(assignment)] = np.iinfo(np.int64).max
        if len(assignment) >= len(sizes):
            raise ValueError("every variable is already assigned")
    return int(np.argmin(sizes))


def solve(
    inst: CspInstance,
    engine: str = "rtac",
    budget: int | None = None,
    *,
    max_solutions: int | None = 1,
) -> SearchResult:
    """Depth-first MAC search.

    Stops at the first solution by default. ``max_solutions=None`` keeps
    enumerating solutions until the tree or the assignment ``budget`` runs out,
    which is how benchmarks collect a fixed number of assignment samples.
    """
    enforcer = make_engine(inst, engine)
    stats = SearchStats()
    first: tuple[int, ...] | None = None

    try:
        root, stats.root = enforcer.enforce(full_domains(inst), range(inst.n))
    except Inconsistent as exc:
        stats.root = exc.stats
        return SearchResult(Status.UNSAT, None, stats)

    stack = [SearchNode(0, root, {})]
    while stack:
        node = stack[-1]
        if node.values is None:
            if node.level == inst.n:
                stack.pop()
                solution = tuple(node.assignment[x] for x in range(inst.n))
                stats.solutions_found += 1
                if first is None:
                    first = solution
                if max_solutions is not None and stats.solutions_found >= max_solutions:
                    return SearchResult(Status.SOLUTION, first, stats)
                continue
            node.var = heuristics(node.domains, node.assignment)
            node.values = iter(K.nonzero_indices(Tensor._wrap(node.domains.array[node.var])))
        val = next(node.values, None)
        if val is None:
            stack.pop()
            continue
        if budget is not None and stats.assignments >= budget:
            return SearchResult(Status.BUDGET_EXHAUSTED, first, stats)
        child = assign(node.domains, node.var, val)
        stats.assignments += 1
        start = time.perf_counter()
        try:
            child, step = enforcer.enforce(child, [node.var])
        except Inconsistent as exc:
            stats.per_assignment.append((enforcer.work(exc.stats), time.perf_counter() - start))
            continue
        stats.per_assignment.append((enforcer.work(step), time.perf_counter() - start))
        stack.append(SearchNode(node.level + 1, child, {**node.assignment, node.var: val}))

    status = Status.SOLUTION if first is not None else Status.UNSAT
    return SearchResult(status, first, stats)
