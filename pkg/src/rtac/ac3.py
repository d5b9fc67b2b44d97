"""AC-3 baseline: FIFO arc queue with a revision counter.

Two routes share one queue discipline:

* :func:`ac3` / :func:`revise` work on per-variable value sets and are the
  readable reference.
* :class:`AC3` runs the same schedule in a numba-compiled loop over bitset
  domains; search and benchmarks use it. Both report identical revision
  counts and domains.

Queue discipline: the initial queue holds, for every seed ``s``, the arcs
``(z, s)`` over constrained neighbours ``z``, in ascending ``(z, s)`` order.
After ``revise(x, y)`` shrinks ``dom(x)``, every arc ``(z, x)`` over a
constrained neighbour ``z`` (``y`` included) that is not already queued is
appended in ascending ``z`` order. One revision is one dequeue.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, MutableSequence, Sequence

import numba
import numpy as np

from .engine import EnforceStats, Inconsistent
from .kernel import DTYPE, Tensor
from .model import CspInstance, DomainMatrix, domains_to_sets, sets_to_domains, support_set


class ArcQueue:
    """FIFO of directed arcs that refuses an arc already waiting in it."""

    def __init__(self, arcs: Iterable[tuple[int, int]] = ()):
        self._queue: deque[tuple[int, int]] = deque()
        self._members: set[tuple[int, int]] = set()
        for arc in arcs:
            self.push(arc)

    def push(self, arc: tuple[int, int]) -> bool:
        if arc in self._members:
            return False
        self._members.add(arc)
        self._queue.append(arc)
        return True

    def pop(self) -> tuple[int, int]:
        arc = self._queue.popleft()
        self._members.discard(arc)
        return arc

    def __len__(self) -> int:
        return len(self._queue)

    def __contains__(self, arc: object) -> bool:
        return arc in self._members


def initial_arcs(inst: CspInstance, seeds: Iterable[int]) -> list[tuple[int, int]]:
    arcs = {(z, s) for s in seeds for z in inst.neighbors[s]}
    return sorted(arcs)


def revise(inst: CspInstance, domains: MutableSequence[set[int]], x: int, y: int) -> set[int]:
    """Drop the values of ``x`` with no support left in ``dom(y)``; return them."""
    if not inst.is_constrained(x, y):
        raise ValueError(f"({x}, {y}) is not a constrained pair")
    dom_y = domains[y]
    removed = {a for a in domains[x] if not (support_set(inst, x, y, a) & dom_y)}
    domains[x] -= removed
    return removed


def ac3(
    inst: CspInstance,
    domains: DomainMatrix | Sequence[Iterable[int]],
    seeds: Sequence[int],
) -> tuple[DomainMatrix, EnforceStats]:
    """Reference AC-3 on value sets. Raises :class:`Inconsistent` on wipeout."""
    if isinstance(domains, Tensor):
        sets = domains_to_sets(domains)
    else:
        sets = [set(values) for values in domains]
    stats = EnforceStats()
    queue = ArcQueue(initial_arcs(inst, seeds))
    while queue:
        x, y = queue.pop()
        stats.revisions += 1
        removed = revise(inst, sets, x, y)
        if not removed:
            continue
        stats.total_removed += len(removed)
        if not sets[x]:
            stats.wipeout = True
            raise Inconsistent(stats)
        for z in inst.neighbors[x]:
            queue.push((z, x))
    return sets_to_domains(sets, inst.d), stats


@numba.njit(cache=True, nogil=True)
def _ac3_kernel(dom, nbr_ptr, nbr_idx, arc_src, arc_rev, rel, seeds_mask):
    # dom: [n, words] uint64 bitsets, updated in place.
    # rel: [arcs, d, words] uint64 support bitsets of arc (x, y) per value of x.
    n_arcs = nbr_idx.shape[0]
    d = rel.shape[1]
    words = dom.shape[1]
    queue = np.empty(n_arcs + 1, dtype=np.int64)
    queued = np.zeros(n_arcs, dtype=np.bool_)
    head = 0
    size = 0
    cap = n_arcs + 1
    # Arc ids follow (x, y) lexicographic order, so scanning ids ascending
    # yields the sorted initial queue.
    for p in range(n_arcs):
        if seeds_mask[nbr_idx[p]]:
            queue[(head + size) % cap] = p
            size += 1
            queued[p] = True
    revisions = 0
    removed_total = 0
    while size > 0:
        p = queue[head]
        head = (head + 1) % cap
        size -= 1
        queued[p] = False
        revisions += 1
        x = arc_src[p]
        y = nbr_idx[p]
        removed = 0
        for a in range(d):
            w = a >> 6
            bit = np.uint64(1) << np.uint64(a & 63)
            if dom[x, w] & bit == 0:
                continue
            found = False
            for v in range(words):
                if rel[p, a, v] & dom[y, v] != 0:
                    found = True
                    break
            if not found:
                dom[x, w] &= ~bit
                removed += 1
        if removed == 0:
            continue
        removed_total += removed
        empty = True
        for v in range(words):
            if dom[x, v] != 0:
                empty = False
                break
        if empty:
            return revisions, removed_total, True
        for q in range(nbr_ptr[x], nbr_ptr[x + 1]):
            r = arc_rev[q]
            if not queued[r]:
                queue[(head + size) % cap] = r
                size += 1
                queued[r] = True
    return revisions, removed_total, False


def _to_bitsets(rows: np.ndarray, words: int) -> np.ndarray:
    """Pack the last axis of a 0/1 array into little-endian uint64 words."""
    d = rows.shape[-1]
    padded = np.zeros(rows.shape[:-1] + (words * 64,), dtype=np.uint8)
    padded[..., :d] = rows != 0
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(rows.shape[:-1] + (words,))


def _from_bitsets(bits: np.ndarray, d: int) -> np.ndarray:
    raw = np.unpackbits(bits.view(np.uint8), axis=-1, bitorder="little")
    return raw[..., :d]


class AC3:
    """Compiled AC-3 bound to one instance."""

    name = "ac3"

    def __init__(self, inst: CspInstance):
        self.inst = inst
        n, d = inst.n, inst.d
        self.words = (d + 63) // 64
        degrees = [len(nb) for nb in inst.neighbors]
        self.nbr_ptr = np.zeros(n + 1, dtype=np.int64)
        self.nbr_ptr[1:] = np.cumsum(degrees)
        self.nbr_idx = np.array([y for nb in inst.neighbors for y in nb], dtype=np.int64)
        self.arc_src = np.repeat(np.arange(n, dtype=np.int64), degrees)
        arc_id = {(int(x), int(y)): p for p, (x, y) in enumerate(zip(self.arc_src, self.nbr_idx))}
        self.arc_rev = np.array([arc_id[y, x] for x, y in arc_id], dtype=np.int64)
        rel = np.zeros((len(arc_id), d, d), dtype=np.uint8)
        for (x, y), p in arc_id.items():
            rel[p] = inst.relation(x, y)
        self.rel = _to_bitsets(rel, self.words)

    def enforce(self, domains: DomainMatrix, seeds: Sequence[int]) -> tuple[DomainMatrix, EnforceStats]:
        """Run AC-3 seeded with ``seeds``; raises :class:`Inconsistent` on wipeout."""
        seeds_mask = np.zeros(self.inst.n, dtype=np.bool_)
        seeds_mask[np.asarray(list(seeds), dtype=np.int64)] = True
        bits = _to_bitsets(domains.array, self.words)
        revisions, removed, wiped = _ac3_kernel(
            bits, self.nbr_ptr, self.nbr_idx, self.arc_src, self.arc_rev, self.rel, seeds_mask
        )
        stats = EnforceStats(revisions=int(revisions), total_removed=int(removed), wipeout=bool(wiped))
        if wiped:
            raise Inconsistent(stats)
        return Tensor._wrap(_from_bitsets(bits, self.inst.d).astype(DTYPE)), stats

    @staticmethod
    def work(stats: EnforceStats) -> int:
        return stats.revisions
