"""Slow, obviously-correct ground truth for the engines.

:func:`fixpoint_ac` runs the removal recurrence literally: every iteration
rescans every present ``(x, a)`` against every declared constraint and
collects those whose supports all lie in the already-removed set. Nothing is
incremental. :func:`enumerate_solutions` brute-forces tiny instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .kernel import Tensor
from .model import CspInstance, DomainMatrix, InstanceError, domains_to_sets, sets_to_domains, support_set

ENUMERATION_LIMIT = 10**7


@dataclass
class RemovalTrace:
    iterations: list[set[tuple[int, int]]] = field(default_factory=list)

    @property
    def removed(self) -> set[tuple[int, int]]:
        return set().union(*self.iterations)


def _as_sets(domains: DomainMatrix | Sequence[Iterable[int]]) -> list[set[int]]:
    if isinstance(domains, Tensor):
        return domains_to_sets(domains)
    return [set(values) for values in domains]


def fixpoint_ac(
    inst: CspInstance,
    domains: DomainMatrix | Sequence[Iterable[int]] | None = None,
) -> tuple[DomainMatrix, RemovalTrace]:
    """Largest arc-consistent subdomain of ``domains`` (full domains by default).

    Wiped-out variables show up as all-zero rows; it never raises.
    """
    initial = [set(range(inst.d)) for _ in range(inst.n)] if domains is None else _as_sets(domains)
    absent = {(x, a) for x in range(inst.n) for a in range(inst.d) if a not in initial[x]}
    removed: set[tuple[int, int]] = set()
    trace = RemovalTrace()
    while True:
        gone = absent | removed
        batch = set()
        for x in range(inst.n):
            for a in initial[x]:
                if (x, a) in removed:
                    continue
                for y in inst.neighbors[x]:
                    if all((y, b) in gone for b in support_set(inst, x, y, a)):
                        batch.add((x, a))
                        break
        if not batch:
            break
        trace.iterations.append(batch)
        removed |= batch
    result = [{a for a in initial[x] if (x, a) not in removed} for x in range(inst.n)]
    return sets_to_domains(result, inst.d), trace


def is_arc_consistent(inst: CspInstance, domains: DomainMatrix | Sequence[Iterable[int]]) -> bool:
    """Every present value has a present support on every incident declared constraint."""
    sets = _as_sets(domains)
    for x in range(inst.n):
        for a in sets[x]:
            for y in inst.neighbors[x]:
                if not support_set(inst, x, y, a) & sets[y]:
                    return False
    return True


def enumerate_solutions(inst: CspInstance, limit: int | None = None) -> list[tuple[int, ...]]:
    """All satisfying assignments in lexicographic order, at most ``limit`` of them."""
    if inst.d**inst.n > ENUMERATION_LIMIT:
        raise InstanceError(f"d^n = {inst.d}^{inst.n} exceeds the enumeration limit {ENUMERATION_LIMIT}")
    found = []
    for assignment in itertools.product(range(inst.d), repeat=inst.n):
        if inst.satisfies(assignment):
            found.append(assignment)
            if limit is not None and len(found) >= limit:
                break
    return found
