"""Dense float64 tensors with deterministic kernels and a seeded RNG.

Tensors are immutable, row-major, rank <= 4, and hold only finite
values. Kernels are pure functions of their inputs: reductions use a
fixed single-pass algorithm and matmul accumulates in a fixed
left-to-right order, so every result is bitwise reproducible.
"""

from __future__ import annotations

import numpy as np

from . import _normal

MAX_RANK = 4

EWISE_OPS = ("add", "sub", "mul", "div", "max")
REDUCE_OPS = ("mean", "var_pop", "min", "max", "sum")


class ShapeError(ValueError):
    """Operand shapes violate an operation's contract."""


def check_shape(dims) -> tuple[int, ...]:
    """Validate and normalize tensor dims (rank <= 4, extents >= 1)."""
    dims = tuple(int(d) for d in dims)
    if len(dims) > MAX_RANK:
        raise ShapeError(f"rank {len(dims)} exceeds maximum rank {MAX_RANK}")
    if any(d < 1 for d in dims):
        raise ShapeError(f"every extent must be >= 1, got {dims}")
    return dims


class Tensor:
    """Immutable dense array of float64 in row-major (C) order."""

    __slots__ = ("_data",)

    def __init__(self, data, shape=None):
        arr = np.array(data, dtype=np.float64, order="C", copy=True)
        if shape is not None:
            arr = arr.reshape(check_shape(shape))
        else:
            check_shape(arr.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor values must be finite (no NaN/Inf)")
        arr.setflags(write=False)
        self._data = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        # Internal fast path for kernel-owned arrays: skips the defensive
        # copy but keeps the finiteness and shape invariants.
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        check_shape(arr.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor values must be finite (no NaN/Inf)")
        arr.setflags(write=False)
        out = cls.__new__(cls)
        out._data = arr
        return out

    @property
    def data(self) -> np.ndarray:
        """Read-only numpy view of the buffer."""
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def size(self) -> int:
        return self._data.size

    def item(self) -> float:
        if self._data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, shape {self.shape}")
        return float(self._data.reshape(-1)[0])

    def reshape(self, shape) -> "Tensor":
        return Tensor._wrap(self._data.reshape(check_shape(shape)))

    def tolist(self):
        return self._data.tolist()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, data={self._data!r})"


# ---------------------------------------------------------------------------
# Seeded counter-based RNG (splitmix64 stream).
# ---------------------------------------------------------------------------

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


class RngState:
    """Deterministic counter-based generator: (seed, counter) -> stream.

    Draw i of stream `seed` is splitmix64(seed + (counter+i+1)*golden),
    so identical (seed, counter) pairs always reproduce the same values,
    independent of how earlier draws were batched.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.counter = int(counter)

    def clone(self) -> "RngState":
        return RngState(self.seed, self.counter)

    def uniform(self, n: int) -> np.ndarray:
        """n i.i.d. draws from the open interval (0, 1); advances counter."""
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            bits = _mix64(_U64(self.seed) + _GOLDEN * idx)
        return ((bits >> _U64(11)).astype(np.float64) + 0.5) * 2.0 ** -53

    def normal(self, n: int, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        if std < 0:
            raise ValueError(f"std must be >= 0, got {std}")
        z = _normal.norm_ppf(self.uniform(n))
        return np.asarray(mean + std * z, dtype=np.float64)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n)."""
        return np.argsort(self.uniform(n), kind="stable")


# ---------------------------------------------------------------------------
# Construction kernels.
# ---------------------------------------------------------------------------

def full(shape, value: float) -> Tensor:
    """Tensor of the given shape with every element equal to value."""
    return Tensor._wrap(np.full(check_shape(shape), float(value)))


def randn(shape, rng: RngState, mean: float = 0.0, std: float = 1.0) -> Tensor:
    """I.i.d. N(mean, std^2) draws via the inverse-CDF transform."""
    dims = check_shape(shape)
    n = int(np.prod(dims)) if dims else 1
    return Tensor._wrap(rng.normal(n, mean, std).reshape(dims))


# ---------------------------------------------------------------------------
# Elementwise and matmul kernels.
# ---------------------------------------------------------------------------

def _ewise_operands(a: Tensor, b: Tensor) -> None:
    if a.shape == b.shape or a.size == 1 or b.size == 1:
        return
    raise ShapeError(
        f"ewise operands must match or one must be scalar, got {a.shape} vs {b.shape}"
    )


def ewise(op: str, a: Tensor, b: Tensor) -> Tensor:
    """Elementwise {add, sub, mul, div, max}; only scalar broadcast."""
    _ewise_operands(a, b)
    # Overflow to inf is caught by the output tensor's finiteness check,
    # so the intermediate warning is just noise.
    with np.errstate(over="ignore", invalid="ignore"):
        return _ewise_dispatch(op, a.data, b.data)


def _ewise_dispatch(op: str, x: np.ndarray, y: np.ndarray) -> Tensor:
    if op == "add":
        return Tensor._wrap(x + y)
    if op == "sub":
        return Tensor._wrap(x - y)
    if op == "mul":
        return Tensor._wrap(x * y)
    if op == "div":
        if np.any(y == 0.0):
            raise ZeroDivisionError("elementwise division by zero")
        return Tensor._wrap(x / y)
    if op == "max":
        return Tensor._wrap(np.maximum(x, y))
    raise ValueError(f"unknown ewise op {op!r}; expected one of {EWISE_OPS}")


def _matmul_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Rank-1 update per inner index: for every (i, j) the products
    # a[i,k]*b[k,j] are added in increasing k, exactly the order of a
    # naive triple loop. BLAS is deliberately not used here because it
    # reorders the accumulation.
    m, k = a.shape
    _, n = b.shape
    out = np.zeros((m, n), dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        for kk in range(k):
            out += a[:, kk : kk + 1] * b[kk : kk + 1, :]
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with deterministic left-to-right accumulation."""
    if len(a.shape) != 2 or len(b.shape) != 2:
        raise ShapeError(f"matmul needs rank-2 operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    return Tensor._wrap(_matmul_arrays(a.data, b.data))


# ---------------------------------------------------------------------------
# Reductions: single-pass Welford statistics plus min/max/sum.
# ---------------------------------------------------------------------------

_WELFORD_LANES = 1024


def welford(values: np.ndarray) -> tuple[int, float, float]:
    """One pass over the data; returns (n, mean, M2) with M2 = sum((x-mean)^2).

    The stream is processed in vectorized lanes that each run the
    classic Welford update, then the lane accumulators are folded
    pairwise with the standard two-stream merge. Every element is read
    exactly once and the result is deterministic for a given input.
    """
    flat = np.ascontiguousarray(values).reshape(-1)
    n = flat.size
    if n == 0:
        raise ValueError("welford needs at least one element")
    lanes = min(n, _WELFORD_LANES)
    steps = n // lanes
    body = flat[: steps * lanes].reshape(steps, lanes)

    mean = body[0].astype(np.float64).copy()
    m2 = np.zeros(lanes, dtype=np.float64)
    for i in range(1, steps):
        delta = body[i] - mean
        mean += delta / (i + 1)
        m2 += delta * (body[i] - mean)
    counts = np.full(lanes, float(steps))

    while mean.size > 1:
        size = mean.size
        half = size // 2
        na, nb = counts[:half], counts[half : 2 * half]
        ma, mb = mean[:half], mean[half : 2 * half]
        sa, sb = m2[:half], m2[half : 2 * half]
        nab = na + nb
        delta = mb - ma
        merged_mean = ma + delta * (nb / nab)
        merged_m2 = sa + sb + delta * delta * (na * nb / nab)
        if size % 2:
            counts = np.concatenate([nab, counts[-1:]])
            mean = np.concatenate([merged_mean, mean[-1:]])
            m2 = np.concatenate([merged_m2, m2[-1:]])
        else:
            counts, mean, m2 = nab, merged_mean, merged_m2

    count = float(counts[0])
    mu = float(mean[0])
    acc = float(m2[0])
    for x in flat[steps * lanes :]:
        count += 1.0
        delta = float(x) - mu
        mu += delta / count
        acc += delta * (float(x) - mu)
    return int(count), mu, acc


def reduce(op: str, x: Tensor) -> float:
    """Full reduction to a float: mean, var_pop (divide by N), min, max, sum."""
    if op == "mean":
        return welford(x.data)[1]
    if op == "var_pop":
        n, _, m2 = welford(x.data)
        return m2 / n
    if op == "min":
        return float(np.min(x.data))
    if op == "max":
        return float(np.max(x.data))
    if op == "sum":
        return float(np.sum(x.data))
    raise ValueError(f"unknown reduce op {op!r}; expected one of {REDUCE_OPS}")
