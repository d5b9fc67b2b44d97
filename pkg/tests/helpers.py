"""Shared fixtures data and independent checkers for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from rtac.generate import GenConfig, generate
from rtac.model import CspInstance, support_set

EQ2 = CspInstance.from_pairs(2, 2, [(0, 1, [(0, 0)])])
PATH3 = CspInstance.from_pairs(3, 2, [(0, 1, [(0, 0), (1, 1)]), (1, 2, [(0, 0)])])
WIPE2 = CspInstance.from_pairs(2, 1, [(0, 1, [])])


def random_configs(count: int, seed: int, *, n_range=(2, 20), d_range=(1, 6),
                   density_range=(0.1, 1.0), tightness_range=(0.0, 0.9)) -> list[GenConfig]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        out.append(GenConfig(
            n=int(rng.integers(n_range[0], n_range[1] + 1)),
            d=int(rng.integers(d_range[0], d_range[1] + 1)),
            density=round(float(rng.uniform(*density_range)), 3),
            tightness=round(float(rng.uniform(*tightness_range)), 3),
            seed=int(rng.integers(0, 2**63)),
        ))
    return out


def random_instances(count: int, seed: int, **ranges) -> list[CspInstance]:
    return [generate(cfg) for cfg in random_configs(count, seed, **ranges)]


def tiny_configs(count: int, seed: int, max_space: int = 10**5) -> list[GenConfig]:
    """Random configs with d**n <= max_space."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = int(rng.integers(1, 6))
        n_max = 1
        while d ** (n_max + 1) <= max_space and n_max < 12:
            n_max += 1
        n = int(rng.integers(1, n_max + 1))
        out.append(GenConfig(n=n, d=d, density=round(float(rng.uniform(0.1, 1.0)), 3),
                             tightness=round(float(rng.uniform(0.0, 0.8)), 3),
                             seed=int(rng.integers(0, 2**63))))
    return out


def cells(domains) -> set[tuple[int, int]]:
    xs, vs = np.nonzero(domains.array)
    return set(zip(xs.tolist(), vs.tolist()))


def prop2_violations(inst: CspInstance, initial: set[tuple[int, int]],
                     iterations: list[set[tuple[int, int]]]) -> list[str]:
    """Check both halves of the incremental-cause property on a removal trace.

    ``iterations[k-1]`` is V(k); ``gone`` before iteration k-1 is everything
    absent from ``initial`` plus V(1) .. V(k-2).
    """
    problems = []
    absent = {(x, a) for x in range(inst.n) for a in range(inst.d)} - initial
    for k in range(2, len(iterations) + 1):
        gone = absent.union(*iterations[:k - 2])
        prev = iterations[k - 2]
        for x, a in iterations[k - 1]:
            causes = 0
            for y in inst.neighbors[x]:
                rest = {b for b in support_set(inst, x, y, a) if (y, b) not in gone}
                if not rest:
                    problems.append(f"V({k}) {(x, a)}: support on {y} already gone before V({k - 1})")
                elif all((y, b) in prev for b in rest):
                    causes += 1
            if causes == 0:
                problems.append(f"V({k}) {(x, a)}: no constraint lost its last supports in V({k - 1})")
    return problems


def brute_force_dac(inst: CspInstance) -> set[tuple[int, int]]:
    """Union of every arc-consistent subset of the full domain (tiny instances only)."""
    universe = [(x, a) for x in range(inst.n) for a in range(inst.d)]
    union: set[tuple[int, int]] = set()
    for mask in itertools.product((False, True), repeat=len(universe)):
        subset = {c for c, keep in zip(universe, mask) if keep}
        if subset <= union:
            continue
        ok = all(
            any((y, b) in subset for b in support_set(inst, x, y, a))
            for x, a in subset for y in inst.neighbors[x]
        )
        if ok:
            union |= subset
    return union
