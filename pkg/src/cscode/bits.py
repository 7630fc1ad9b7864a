"""Small helpers for fixed-length bit words stored as uint8 arrays."""

from __future__ import annotations

import numpy as np


def as_bits(word, length=None, name="word") -> np.ndarray:
    """Coerce a bit string / sequence / array to a flat uint8 array of 0s and 1s."""
    if isinstance(word, str):
        if not set(word) <= {"0", "1"}:
            raise ValueError(f"{name} contains characters other than '0'/'1': {word!r}")
        arr = np.frombuffer(word.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(word)
        if arr.dtype.kind == "f" and not np.all(arr == np.round(arr)):
            raise ValueError(f"{name} has non-integer entries")
        arr = arr.astype(np.uint8, copy=True).ravel()
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} has entries outside {{0, 1}}")
    if length is not None and arr.size != length:
        raise ValueError(f"{name} has length {arr.size}, expected {length}")
    return arr


def format_bits(arr) -> str:
    arr = np.asarray(arr).ravel()
    return "".join("1" if b else "0" for b in arr)


def pack_bits(rows: np.ndarray) -> np.ndarray:
    """Interpret each row of a (..., w) bit array as a big-endian integer."""
    rows = np.asarray(rows)
    w = rows.shape[-1]
    weights = (1 << np.arange(w - 1, -1, -1)).astype(np.int64)
    return rows.astype(np.int64) @ weights


def unpack_bits(values, width: int) -> np.ndarray:
    """Inverse of pack_bits: integers -> (..., width) uint8 bit rows, big-endian."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def hamming_distance(a, b) -> int:
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))
