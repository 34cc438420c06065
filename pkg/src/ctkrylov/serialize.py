"""Binary container for third-order tensors (.ct3 files).

Layout: magic bytes ``CT3\\0``, three little-endian uint64 dimensions
(n1, n2, n3), then n1*n2*n3 little-endian float64 scalars in slice-major
order with columns contiguous within each slice.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .tensor import check_tensor3

__all__ = ["save_tensor", "load_tensor"]

MAGIC = b"CT3\x00"
_HEADER = struct.Struct("<4sQQQ")


def save_tensor(a: np.ndarray, path) -> None:
    a = check_tensor3(a)
    n1, n2, n3 = a.shape
    # column-within-slice order = Fortran order of each n1 x n2 slice
    cols = np.stack([a[:, :, k].ravel(order="F") for k in range(n3)])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n1, n2, n3))
        fh.write(cols.astype("<f8").tobytes())


def load_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, n1, n2, n3 = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    count = n1 * n2 * n3
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if data.size != count:
        raise ValueError(f"{path}: expected {count} scalars, found {data.size}")
    slices = data.reshape(n3, n2, n1)  # each slice stored column-major
    return np.ascontiguousarray(slices.transpose(2, 1, 0))
