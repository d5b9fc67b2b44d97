"""Dense integer tensors and the handful of operations recurrent AC needs.

Tensors are immutable, C-ordered and hold non-negative integers in a fixed
16-bit unsigned cell. Boolean-role tensors use the 0/1 convention.

Every operation may fan its work out over a thread pool. Work is split into
contiguous, disjoint blocks (flat cells for elementwise ops, the leading axis
for reductions and the batched product) and each block is written by exactly
one worker, so results never depend on the worker count.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence

import numpy as np

DTYPE = np.uint16
CELL_MAX = int(np.iinfo(DTYPE).max)

_workers: contextvars.ContextVar[int] = contextvars.ContextVar(
    "rtac_workers", default=max(1, int(os.environ.get("RTAC_WORKERS", "1") or 1))
)
_pools: dict[int, ThreadPoolExecutor] = {}


class KernelError(ValueError):
    """Raised on a violated operation precondition (bad axis, shape, index)."""


def get_workers() -> int:
    return _workers.get()


@contextlib.contextmanager
def workers(count: int) -> Iterator[None]:
    """Run the enclosed kernel calls with ``count`` workers (context-local)."""
    if count < 1:
        raise KernelError(f"worker count must be >= 1, got {count}")
    token = _workers.set(int(count))
    try:
        yield
    finally:
        _workers.reset(token)


def set_workers(count: int) -> None:
    if count < 1:
        raise KernelError(f"worker count must be >= 1, got {count}")
    _workers.set(int(count))


def _pool(count: int) -> ThreadPoolExecutor:
    pool = _pools.get(count)
    if pool is None:
        pool = _pools[count] = ThreadPoolExecutor(max_workers=count, thread_name_prefix="rtac-kernel")
    return pool


def _blocks(length: int, count: int) -> list[tuple[int, int]]:
    count = max(1, min(count, length))
    step, extra = divmod(length, count)
    out, lo = [], 0
    for i in range(count):
        hi = lo + step + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def _run_blocks(length: int, job: Callable[[int, int], None]) -> None:
    count = get_workers()
    if count == 1 or length < 2:
        job(0, length)
        return
    futures = [_pool(count).submit(job, lo, hi) for lo, hi in _blocks(length, count) if hi > lo]
    for fut in futures:
        fut.result()


class Tensor:
    """An immutable dense tensor of small non-negative integers."""

    __slots__ = ("_array",)

    def __init__(self, data, shape: Sequence[int] | None = None):
        if isinstance(data, Tensor):
            arr = data._array
        else:
            raw = np.asarray(data)
            if raw.size and raw.dtype.kind not in "biu":
                if raw.dtype.kind != "f" or not np.all(raw == np.floor(raw)):
                    raise KernelError("tensor cells must be integers")
            if raw.size and (raw.min() < 0 or raw.max() > CELL_MAX):
                raise KernelError(f"tensor cells must lie in [0, {CELL_MAX}]")
            arr = np.array(raw, dtype=DTYPE, order="C")
        if shape is not None:
            shape = tuple(int(s) for s in shape)
            if int(np.prod(shape, dtype=np.int64)) != arr.size:
                raise KernelError(f"data length {arr.size} does not match shape {shape}")
            arr = arr.reshape(shape)
        arr.flags.writeable = False
        self._array = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        # Internal fast path: arr is already a fresh DTYPE array owned by us.
        t = cls.__new__(cls)
        if arr.dtype != DTYPE or not arr.flags.c_contiguous:
            arr = np.array(arr, dtype=DTYPE, order="C")
        arr.flags.writeable = False
        t._array = arr
        return t

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "Tensor":
        return cls._wrap(np.zeros(tuple(shape), dtype=DTYPE))

    @classmethod
    def ones(cls, shape: Sequence[int]) -> "Tensor":
        return cls._wrap(np.ones(tuple(shape), dtype=DTYPE))

    @property
    def shape(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def rank(self) -> int:
        return self._array.ndim

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the cells (read-only)."""
        return self._array.reshape(-1)

    @property
    def array(self) -> np.ndarray:
        """Read-only ndarray view in the tensor's shape."""
        return self._array

    def tolist(self):
        return self._array.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._array, other._array))

    def __hash__(self) -> int:
        return hash((self.shape, self._array.tobytes()))

    def __repr__(self) -> str:
        return f"Tensor(shape={list(self.shape)}, data={self._array.tolist()})"


def _axis(dim: int, rank: int, *, inclusive: bool = False) -> int:
    bound = rank + 1 if inclusive else rank
    norm = dim + bound if dim < 0 else dim
    if not 0 <= norm < bound:
        raise KernelError(f"axis {dim} out of range for rank {rank}")
    return norm


def _same_shape(*tensors: Tensor) -> None:
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise KernelError(f"shape mismatch: {sorted(shapes)}")


def sum_along(t: Tensor, dim: int) -> Tensor:
    """Integer sum over axis ``dim``; the axis is removed."""
    axis = _axis(dim, t.rank)
    src = t.array
    out_shape = src.shape[:axis] + src.shape[axis + 1:]
    out = np.empty(out_shape, dtype=np.uint64)
    if axis == 0 or src.ndim == 1:
        np.sum(src, axis=axis, dtype=np.uint64, out=out)
    else:
        def job(lo: int, hi: int) -> None:
            np.sum(src[lo:hi], axis=axis, dtype=np.uint64, out=out[lo:hi])
        _run_blocks(src.shape[0], job)
    if out.size and out.max() > CELL_MAX:
        raise KernelError("sum overflows the tensor cell width")
    return Tensor._wrap(out)


def any_true(t: Tensor) -> bool:
    return bool(t.array.any())


def nonzero_indices(t: Tensor) -> list:
    """Indices of nonzero cells in ascending row-major order.

    Rank-1 tensors give a plain list of ints, higher ranks a list of tuples.
    """
    idx = np.nonzero(t.array)
    if t.rank == 1:
        return idx[0].tolist()
    return list(zip(*(axis.tolist() for axis in idx)))


def dim_expand(t: Tensor, dim: int) -> Tensor:
    axis = _axis(dim, t.rank, inclusive=True)
    return Tensor._wrap(np.expand_dims(t.array, axis))


def dim_reduct(t: Tensor, dim: int) -> Tensor:
    axis = _axis(dim, t.rank)
    if t.shape[axis] != 1:
        raise KernelError(f"axis {dim} has size {t.shape[axis]}, expected 1")
    return Tensor._wrap(np.squeeze(t.array, axis=axis))


def _elementwise(shape: tuple[int, ...], fn: Callable[[slice], np.ndarray]) -> Tensor:
    out = np.empty(shape, dtype=DTYPE)
    flat = out.reshape(-1)

    def job(lo: int, hi: int) -> None:
        flat[lo:hi] = fn(slice(lo, hi))

    _run_blocks(flat.size, job)
    return Tensor._wrap(out)


def where_select(cond: Tensor, x: Tensor, y: Tensor) -> Tensor:
    """Cell from ``x`` where ``cond`` is nonzero, else from ``y``. No broadcasting."""
    _same_shape(cond, x, y)
    c, a, b = cond.data, x.data, y.data
    return _elementwise(cond.shape, lambda s: np.where(c[s] != 0, a[s], b[s]))


def _compare(t: Tensor, other, op: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Tensor:
    a = t.data
    if isinstance(other, Tensor):
        _same_shape(t, other)
        b = other.data
        return _elementwise(t.shape, lambda s: op(a[s], b[s]))
    value = int(other)
    return _elementwise(t.shape, lambda s: op(a[s], value))


def greater(t: Tensor, other) -> Tensor:
    """0/1 mask of ``t > other`` (tensor of equal shape or a scalar)."""
    return _compare(t, other, np.greater)


def equal(t: Tensor, other) -> Tensor:
    return _compare(t, other, np.equal)


def not_equal(t: Tensor, other) -> Tensor:
    return _compare(t, other, np.not_equal)


def narrow(t: Tensor, dim: int, start: int, length: int) -> Tensor:
    """Contiguous slice ``[start, start + length)`` along ``dim``."""
    axis = _axis(dim, t.rank)
    if start < 0 or length < 0 or start + length > t.shape[axis]:
        raise KernelError(f"narrow [{start}, {start + length}) out of bounds for size {t.shape[axis]}")
    index = [slice(None)] * t.rank
    index[axis] = slice(start, start + length)
    return Tensor._wrap(t.array[tuple(index)])


def index_select(t: Tensor, dim: int, idx: Sequence[int]) -> Tensor:
    """Gather slices along ``dim`` in ``idx`` order."""
    axis = _axis(dim, t.rank)
    size = t.shape[axis]
    index = np.asarray(list(idx), dtype=np.intp)
    if index.size and (index.min() < 0 or index.max() >= size):
        raise KernelError(f"index out of bounds for axis {dim} of size {size}")
    src = t.array
    out_shape = list(src.shape)
    out_shape[axis] = index.size
    out = np.empty(out_shape, dtype=DTYPE)
    if axis == 0 or src.shape[0] == 0:
        np.take(src, index, axis=axis, out=out)
    else:
        def job(lo: int, hi: int) -> None:
            np.take(src[lo:hi], index, axis=axis, out=out[lo:hi])
        _run_blocks(src.shape[0], job)
    return Tensor._wrap(out)


def batched_matvec(a: Tensor, v: Tensor) -> Tensor:
    """``out[i, j, :, 0] = a[i, j] @ v[j, :, 0]`` for ``a`` [n,k,d,d] and ``v`` [k,d,1].

    ``v`` is shared by all ``n`` leading slices of ``a``. Dot products are
    accumulated in the cell width, which is exact whenever one operand is 0/1
    (the only use here: counts never exceed the inner dimension).
    """
    if a.rank != 4 or v.rank != 3:
        raise KernelError(f"expected ranks 4 and 3, got {a.rank} and {v.rank}")
    n, k, rows, cols = a.shape
    if v.shape != (k, cols, 1):
        raise KernelError(f"cannot multiply {list(a.shape)} by {list(v.shape)}")
    if cols > CELL_MAX:
        raise KernelError("inner dimension too large for the cell width")
    src, vec = a.array, v.array
    out = np.empty((n, k, rows, 1), dtype=DTYPE)

    def job(lo: int, hi: int) -> None:
        np.matmul(src[lo:hi], vec, out=out[lo:hi])

    _run_blocks(n, job)
    return Tensor._wrap(out)
