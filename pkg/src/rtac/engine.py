"""Recurrent tensor arc consistency.

Each recurrence revises every variable simultaneously against the variables
whose domains changed in the previous recurrence; the loop stops once no
cardinality changes. All the tensor work goes through :mod:`rtac.kernel`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernel as K
from .kernel import Tensor
from .model import ConstraintTensor, CspInstance, DomainMatrix, build_constraint_tensor


@dataclass
class EnforceStats:
    """Work counters for one enforcement call.

    ``recurrences`` is the number of simultaneous revise steps (RTAC) and
    ``revisions`` the number of arc revisions (AC-3); the other engine leaves
    its counter at zero. ``removed_per_iteration[k]`` holds the ``(x, a)``
    pairs removed by recurrence ``k + 1`` when tracing is on.
    """

    recurrences: int = 0
    revisions: int = 0
    removed_per_iteration: list[set[tuple[int, int]]] = field(default_factory=list)
    total_removed: int = 0
    wipeout: bool = False


class Inconsistent(Exception):
    """Some domain was wiped out. ``stats`` holds the work done up to that point."""

    def __init__(self, stats: EnforceStats):
        super().__init__("domain wipeout")
        self.stats = stats


@dataclass(frozen=True)
class WorkBuffers:
    zero_n: Tensor
    zero_nd: Tensor
    one_nnd: Tensor

    @classmethod
    def for_shape(cls, n: int, d: int) -> "WorkBuffers":
        return cls(Tensor.zeros((n,)), Tensor.zeros((n, d)), Tensor.ones((n, n, d)))


def _check_changed(changed: Sequence[int], n: int) -> list[int]:
    out = [int(i) for i in changed]
    if any(i < 0 or i >= n for i in out):
        raise K.KernelError(f"changed variable index out of range for n={n}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise K.KernelError("changed variables must be strictly ascending")
    return out


def tensor_revise(
    cons: ConstraintTensor,
    domains: DomainMatrix,
    changed: Sequence[int],
    buffers: WorkBuffers | None = None,
) -> DomainMatrix:
    """One simultaneous revise of every ``(x, a)`` against the ``changed`` variables.

    ``(x, a)`` survives iff it is present and has at least one support in the
    current domain of every changed variable.
    """
    n, d = domains.shape
    changed = _check_changed(changed, n)
    if not changed:
        raise K.KernelError("tensor_revise needs at least one changed variable")
    if buffers is None:
        buffers = WorkBuffers.for_shape(n, d)
    k = len(changed)
    sub_cons = K.index_select(cons, 1, changed)                       # [n, k, d, d]
    sub_vars = K.dim_expand(K.index_select(domains, 0, changed), 2)      # [k, d, 1]
    supp = K.dim_reduct(K.batched_matvec(sub_cons, sub_vars), -1)     # [n, k, d]
    ones = K.narrow(buffers.one_nnd, 1, 0, k)
    supp = K.where_select(K.greater(supp, 1), ones, supp)
    supported = K.sum_along(supp, 1)                                   # [n, d]
    return K.where_select(K.not_equal(supported, k), buffers.zero_nd, domains)


def tensor_ac(
    cons: ConstraintTensor,
    domains: DomainMatrix,
    changed: Sequence[int],
    buffers: WorkBuffers | None = None,
    *,
    trace: bool = True,
) -> tuple[DomainMatrix, EnforceStats]:
    """Enforce arc consistency by recurrence, starting from ``changed``.

    Returns the fixpoint domains and stats; raises :class:`Inconsistent` on
    wipeout. With ``trace=False`` the per-iteration removal sets are not
    collected (the counters still are).
    """
    n, d = domains.shape
    changed = _check_changed(changed, n)
    if buffers is None:
        buffers = WorkBuffers.for_shape(n, d)
    stats = EnforceStats()
    counts_pre = K.sum_along(domains, 1)
    while changed:
        revised = tensor_revise(cons, domains, changed, buffers)
        stats.recurrences += 1
        counts = K.sum_along(revised, 1)
        stats.total_removed += int(counts_pre.array.sum(dtype=np.int64) - counts.array.sum(dtype=np.int64))
        if trace:
            xs, vs = np.nonzero(domains.array > revised.array)
            stats.removed_per_iteration.append(set(zip(xs.tolist(), vs.tolist())))
        domains = revised
        if K.any_true(K.equal(counts, buffers.zero_n)):
            stats.wipeout = True
            raise Inconsistent(stats)
        changed = K.nonzero_indices(K.not_equal(counts, counts_pre))
        counts_pre = counts
    return domains, stats


class TensorAC:
    """RTAC bound to one instance: holds the constraint tensor and buffers."""

    name = "rtac"

    def __init__(self, inst: CspInstance, *, trace: bool = False):
        self.inst = inst
        self.cons = build_constraint_tensor(inst)
        self.buffers = WorkBuffers.for_shape(inst.n, inst.d)
        self.trace = trace

    def enforce(self, domains: DomainMatrix, changed: Sequence[int]) -> tuple[DomainMatrix, EnforceStats]:
        return tensor_ac(self.cons, domains, changed, self.buffers, trace=self.trace)

    @staticmethod
    def work(stats: EnforceStats) -> int:
        return stats.recurrences
