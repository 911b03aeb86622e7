"""Fast Walsh-Hadamard transform and row-sampled Hadamard sensing operators."""
from dataclasses import dataclass

import numpy as np

from . import _kernels


def is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


def fwht(x, inplace=False):
    """Unnormalised Sylvester-Hadamard transform ``H @ x``.

    Works on the last axis; 2-D input is transformed row by row.  With
    ``inplace=True`` a contiguous float64 ``x`` is overwritten.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"fwht length must be a power of two, got {n}")
    if x.ndim not in (1, 2):
        raise ValueError("fwht expects a 1-D or 2-D array")
    if inplace:
        if x.dtype != np.float64 or not x.flags.c_contiguous:
            raise ValueError("in-place fwht needs a C-contiguous float64 array")
        buf = x
    else:
        buf = np.array(x, dtype=np.float64, order="C", copy=True)
    if buf.ndim == 1:
        _kernels.fwht_inplace(buf)
    else:
        _kernels.fwht_rows_inplace(buf)
    return buf


@dataclass(frozen=True, eq=False)
class SensingOperator:
    """``A = scale * (H[rows, :input_dim] * column_signs)`` with ``H`` of order ``hadamard_order``."""

    hadamard_order: int
    sampled_rows: np.ndarray
    column_signs: np.ndarray
    scale: float
    input_dim: int
    output_dim: int

    def __post_init__(self):
        self.sampled_rows.setflags(write=False)
        self.column_signs.setflags(write=False)

    def forward(self, s):
        return forward(self, s)

    def adjoint(self, y):
        return adjoint(self, y)

    def materialize(self):
        """Dense ``output_dim x input_dim`` matrix; small operators only."""
        cols = np.arange(self.input_dim)
        parity = _popcount_parity(np.bitwise_and.outer(self.sampled_rows.astype(np.int64), cols))
        return self.scale * np.where(parity, -1.0, 1.0) * self.column_signs[None, :]


def _popcount_parity(a):
    a = a.copy()
    p = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        p ^= a & 1
        a >>= 1
    return p.astype(bool)


def hadamard_order_for(input_dim):
    """Smallest power of two ``M`` with ``M >= input_dim + 1``."""
    return 1 << int(input_dim).bit_length()


def build_operator(input_dim, output_dim, rng):
    """Sample ``output_dim`` distinct non-zero Hadamard rows and random column signs.

    ``rng`` is a ``numpy.random.Generator``; two groups get independent
    operators by passing generators spawned from independent seed streams.
    """
    input_dim = int(input_dim)
    output_dim = int(output_dim)
    if input_dim < 1 or output_dim < 1:
        raise ValueError("operator dimensions must be positive")
    order = hadamard_order_for(input_dim)
    if output_dim >= order:
        raise ValueError(f"need output_dim < {order} (Hadamard order), got {output_dim}")
    # partial Fisher-Yates over rows 1..order-1
    pool = np.arange(1, order, dtype=np.int64)
    for i in range(output_dim):
        j = int(rng.integers(i, pool.shape[0]))
        pool[i], pool[j] = pool[j], pool[i]
    rows = pool[:output_dim].copy()
    signs = np.where(rng.integers(0, 2, size=input_dim) == 1, -1.0, 1.0)
    return SensingOperator(
        hadamard_order=order,
        sampled_rows=rows,
        column_signs=signs,
        scale=1.0 / np.sqrt(output_dim),
        input_dim=input_dim,
        output_dim=output_dim,
    )


def forward(op, s):
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (op.input_dim,):
        raise ValueError(f"forward expects shape ({op.input_dim},), got {s.shape}")
    buf = np.zeros(op.hadamard_order)
    np.multiply(s, op.column_signs, out=buf[: op.input_dim])
    _kernels.fwht_inplace(buf)
    return op.scale * buf[op.sampled_rows]


def adjoint(op, y):
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.output_dim,):
        raise ValueError(f"adjoint expects shape ({op.output_dim},), got {y.shape}")
    buf = np.zeros(op.hadamard_order)
    buf[op.sampled_rows] = y
    _kernels.fwht_inplace(buf)
    out = buf[: op.input_dim] * op.column_signs
    out *= op.scale
    return out
