"""Binary CSP instances, their dense tensor encodings and the JSON file format.

Constraints are the source of truth and are stored sparsely at the graph
level: only declared pairs ``x < y`` appear, each with a d-by-d relation
matrix (``relation[a, b]`` is true iff ``(a, b)`` is allowed). The dense
domain matrix ``[n, d]`` and constraint tensor ``[n, n, d, d]`` are derived.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .kernel import DTYPE, Tensor

# Aliases naming the role a Tensor plays; both are 0/1-valued.
DomainMatrix = Tensor        # [n, d]; row x, column a is 1 iff a is in dom(x)
ConstraintTensor = Tensor    # [n, n, d, d]; universal blocks where undeclared


class InstanceError(ValueError):
    """Invalid instance data or a malformed instance file."""


@dataclass(frozen=True, eq=False)
class Constraint:
    x: int
    y: int
    relation: np.ndarray = field(repr=False)

    def __post_init__(self):
        rel = np.array(self.relation, dtype=bool)
        rel.flags.writeable = False
        object.__setattr__(self, "relation", rel)

    @classmethod
    def from_pairs(cls, x: int, y: int, allowed: Iterable[Sequence[int]], d: int) -> "Constraint":
        rel = np.zeros((d, d), dtype=bool)
        for pair in allowed:
            if len(pair) != 2:
                raise InstanceError(f"allowed entry {pair!r} is not a value pair")
            a, b = int(pair[0]), int(pair[1])
            if not (0 <= a < d and 0 <= b < d):
                raise InstanceError(f"pair ({a}, {b}) outside domain size {d}")
            rel[a, b] = True
        return cls(x, y, rel)

    @property
    def allowed(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.allowed_pairs())

    def allowed_pairs(self) -> list[tuple[int, int]]:
        """Allowed pairs in lexicographic order."""
        a, b = np.nonzero(self.relation)
        return list(zip(a.tolist(), b.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Constraint):
            return NotImplemented
        return (self.x, self.y) == (other.x, other.y) and np.array_equal(self.relation, other.relation)

    def __hash__(self) -> int:
        return hash((self.x, self.y, self.relation.tobytes()))


@dataclass(frozen=True, eq=False)
class CspInstance:
    """An immutable binary CSP over ``n`` variables sharing domain ``range(d)``."""

    n: int
    d: int
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InstanceError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        cons = tuple(sorted(self.constraints, key=lambda c: (c.x, c.y)))
        seen = set()
        for c in cons:
            if not 0 <= c.x < c.y < self.n:
                raise InstanceError(f"constraint ({c.x}, {c.y}) must satisfy 0 <= x < y < n")
            if (c.x, c.y) in seen:
                raise InstanceError(f"duplicate constraint on ({c.x}, {c.y})")
            if c.relation.shape != (self.d, self.d):
                raise InstanceError(f"constraint ({c.x}, {c.y}) relation is not {self.d}x{self.d}")
            seen.add((c.x, c.y))
        object.__setattr__(self, "constraints", cons)

    @classmethod
    def from_pairs(cls, n: int, d: int, constraints: Iterable[tuple[int, int, Iterable[Sequence[int]]]]) -> "CspInstance":
        """Build from ``(x, y, allowed_pairs)`` triples."""
        return cls(n, d, tuple(Constraint.from_pairs(x, y, allowed, d) for x, y, allowed in constraints))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CspInstance):
            return NotImplemented
        return (self.n, self.d, self.constraints) == (other.n, other.d, other.constraints)

    def __hash__(self) -> int:
        return hash((self.n, self.d, self.constraints))

    @cached_property
    def _relations(self) -> dict[tuple[int, int], np.ndarray]:
        # Both orientations, indexed [value of first var, value of second var].
        rel: dict[tuple[int, int], np.ndarray] = {}
        for c in self.constraints:
            rel[c.x, c.y] = c.relation
            rel[c.y, c.x] = c.relation.T
        return rel

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Constrained neighbours of each variable, ascending."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for c in self.constraints:
            adj[c.x].append(c.y)
            adj[c.y].append(c.x)
        return tuple(tuple(sorted(a)) for a in adj)

    def relation(self, x: int, y: int) -> np.ndarray | None:
        """Relation matrix oriented ``[value of x, value of y]``, or None if undeclared."""
        return self._relations.get((x, y))

    def is_constrained(self, x: int, y: int) -> bool:
        return (x, y) in self._relations

    def satisfies(self, assignment: Sequence[int]) -> bool:
        """True iff a complete assignment meets every declared constraint."""
        if len(assignment) != self.n:
            raise InstanceError(f"assignment has {len(assignment)} values, expected {self.n}")
        return all(bool(c.relation[assignment[c.x], assignment[c.y]]) for c in self.constraints)


def support_set(inst: CspInstance, x: int, y: int, a: int) -> frozenset[int]:
    """Values of ``y`` compatible with ``x = a``; all of them if the pair is unconstrained."""
    if not (0 <= x < inst.n and 0 <= y < inst.n):
        raise InstanceError(f"variable index out of range: x={x}, y={y}")
    if x == y:
        raise InstanceError("support sets are defined for distinct variables")
    if not 0 <= a < inst.d:
        raise InstanceError(f"value {a} outside domain size {inst.d}")
    rel = inst.relation(x, y)
    if rel is None:
        return frozenset(range(inst.d))
    return frozenset(np.flatnonzero(rel[a]).tolist())


def full_domains(inst: CspInstance) -> DomainMatrix:
    return Tensor.ones((inst.n, inst.d))


def build_constraint_tensor(inst: CspInstance) -> ConstraintTensor:
    cons = np.ones((inst.n, inst.n, inst.d, inst.d), dtype=DTYPE)
    for c in inst.constraints:
        cons[c.x, c.y] = c.relation
        cons[c.y, c.x] = c.relation.T
    return Tensor._wrap(cons)


def build_tensors(inst: CspInstance) -> tuple[DomainMatrix, ConstraintTensor]:
    """Full domains and the dense constraint tensor for ``inst``."""
    return full_domains(inst), build_constraint_tensor(inst)


def domains_to_sets(domains: DomainMatrix) -> list[set[int]]:
    return [set(np.flatnonzero(row).tolist()) for row in domains.array]


def sets_to_domains(sets: Sequence[Iterable[int]], d: int) -> DomainMatrix:
    out = np.zeros((len(sets), d), dtype=DTYPE)
    for x, values in enumerate(sets):
        for a in values:
            out[x, a] = 1
    return Tensor._wrap(out)


# --- JSON instance format -------------------------------------------------

def instance_to_dict(inst: CspInstance, meta: Mapping | None = None) -> dict:
    doc: dict = {
        "n": inst.n,
        "d": inst.d,
        "constraints": [
            {"x": c.x, "y": c.y, "allowed": [list(p) for p in c.allowed_pairs()]}
            for c in inst.constraints
        ],
    }
    if meta:
        doc.update(meta)
    return doc


def dumps(inst: CspInstance, meta: Mapping | None = None) -> str:
    """Canonical text: compact JSON, keys in fixed order, trailing newline."""
    return json.dumps(instance_to_dict(inst, meta), separators=(",", ":"), ensure_ascii=False) + "\n"


def _as_int(doc: Mapping, key: str) -> int:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"field {key!r} must be an integer")
    return value


def instance_from_dict(doc: Mapping) -> CspInstance:
    if not isinstance(doc, Mapping):
        raise InstanceError("instance document must be a JSON object")
    n, d = _as_int(doc, "n"), _as_int(doc, "d")
    raw = doc.get("constraints", [])
    if not isinstance(raw, list):
        raise InstanceError("field 'constraints' must be a list")
    triples = []
    for entry in raw:
        if not isinstance(entry, Mapping) or not isinstance(entry.get("allowed"), list):
            raise InstanceError(f"malformed constraint entry: {entry!r}")
        triples.append((_as_int(entry, "x"), _as_int(entry, "y"), entry["allowed"]))
    try:
        return CspInstance.from_pairs(n, d, triples)
    except (TypeError, ValueError) as exc:
        raise InstanceError(str(exc)) from exc


def loads(text: str) -> tuple[CspInstance, dict]:
    """Parse an instance document; returns the instance and any extra top-level keys."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    inst = instance_from_dict(doc)
    meta = {k: v for k, v in doc.items() if k not in ("n", "d", "constraints")}
    return inst, meta


def read_instance(path: str | Path) -> tuple[CspInstance, dict]:
    return loads(Path(path).read_text(encoding="utf-8"))


def write_instance(path: str | Path, inst: CspInstance, meta: Mapping | None = None) -> None:
    Path(path).write_text(dumps(inst, meta), encoding="utf-8")
