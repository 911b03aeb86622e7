"""Bit-fragment <-> section index mapping and SPARC-style vector assembly.

Fragments are numpy uint8 arrays of 0/1 (most significant bit first).
"""
import numpy as np


def _as_bits(bits):
    b = np.asarray(bits)
    if b.ndim != 1 or (b.size and not np.all((b == 0) | (b == 1))):
        raise ValueError("fragment must be a 1-D array of 0/1 values")
    return b.astype(np.int64)


def index_encode(fragment, v=None):
    """Big-endian integer value of a ``v``-bit fragment."""
    b = _as_bits(fragment)
    if v is not None and b.size != v:
        raise ValueError(f"fragment has {b.size} bits, expected {v}")
    if b.size > 62:
        raise ValueError("fragments longer than 62 bits are not supported")
    out = 0
    for bit in b:
        out = (out << 1) | int(bit)
    return out


def index_decode(index, v):
    index = int(index)
    if not 0 <= index < (1 << v):
        raise ValueError(f"index {index} out of range for v={v}")
    return ((index >> np.arange(v - 1, -1, -1)) & 1).astype(np.uint8)


def bits_to_indices(bits, v):
    """Split a bit string into consecutive ``v``-bit fragments and encode each."""
    b = _as_bits(bits)
    if b.size % v:
        raise ValueError(f"{b.size} bits do not split into {v}-bit fragments")
    weights = 1 << np.arange(v - 1, -1, -1, dtype=np.int64)
    return b.reshape(-1, v) @ weights


def indices_to_bits(indices, v):
    idx = np.asarray(indices, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= (1 << v)):
        raise ValueError("section index out of range")
    shifts = np.arange(v - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def assemble(indices, L, m):
    """0/1 vector of length ``L*m`` with a one at ``l*m + indices[l]``."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.shape != (L,):
        raise ValueError(f"expected {L} section indices, got shape {idx.shape}")
    if np.any(idx < 0) or np.any(idx >= m):
        raise ValueError("section index out of range")
    out = np.zeros(L * m)
    out[np.arange(L) * m + idx] = 1.0
    return out


def aggregate(index_rows, L, m):
    """Sum of ``assemble`` over the rows of a ``(K, L)`` index array."""
    rows = np.asarray(index_rows, dtype=np.int64).reshape(-1, L)
    if np.any(rows < 0) or np.any(rows >= m):
        raise ValueError("section index out of range")
    out = np.zeros(L * m)
    np.add.at(out, (np.arange(L) * m + rows).ravel(), 1.0)
    return out


def disassemble(vec, L, m):
    """Per-section argmax; inverse of ``assemble`` on one-hot vectors."""
    x = np.asarray(vec, dtype=np.float64)
    if x.shape != (L * m,):
        raise ValueError(f"expected length {L * m}, got {x.shape}")
    return x.reshape(L, m).argmax(axis=1)


def section_sums(vec, L, m):
    return np.asarray(vec, dtype=np.float64).reshape(L, m).sum(axis=1)
