"""Block Toeplitz-plus-Hankel matricization and the brute-force product.

``mat`` lays the frontal slices A_1..A_n of a tensor into the structured
matrix T + H, where block (i, j) of T is A_{|i-j|+1} and block (i, j) of H
is the (i+j-1)-th element of the sequence (A_2, ..., A_n, 0, A_n, ..., A_2).
``ten`` inverts it.  ``oracle_product`` multiplies the matricizations
densely; it is the definitional product used to validate every fast path,
so it must stay independent of the transform machinery.
"""

from __future__ import annotations

import numpy as np

from .tensor import check_tensor3

__all__ = ["mat", "ten", "oracle_product", "DEFAULT_MAT_CAP"]

# Materialized matrices beyond this many rows are refused unless the caller
# raises the cap explicitly.
DEFAULT_MAT_CAP = 4096


def _hankel_slice(a: np.ndarray, k: int) -> np.ndarray:
    """k-th (1-based) element of the anti-diagonal sequence for the Hankel part."""
    n3 = a.shape[2]
    if k <= n3 - 1:
        return a[:, :, k]
    if k == n3:
        return np.zeros(a.shape[:2])
    return a[:, :, 2 * n3 - k]


def mat(a: np.ndarray, max_rows: int = DEFAULT_MAT_CAP) -> np.ndarray:
    """Matricize a third-order tensor into its n1*n3 x n2*n3 structured form."""
    a = check_tensor3(a)
    n1, n2, n3 = a.shape
    if n1 * n3 > max_rows:
        raise ValueError(
            f"matricization would have {n1 * n3} rows, beyond the cap {max_rows}"
        )
    out = np.zeros((n1 * n3, n2 * n3))
    for bi in range(n3):
        for bj in range(n3):
            block = a[:, :, abs(bi - bj)] + _hankel_slice(a, bi + bj + 1)
            out[bi * n1:(bi + 1) * n1, bj * n2:(bj + 1) * n2] = block
    return out


def ten(p: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    """Invert ``mat``: recover the tensor whose matricization is ``p``.

    Only the first block column is needed: its i-th block equals
    C_i + C_{i+1} for i < n3 and C_{n3} for the last block, so the slices
    come out of a backward recurrence.
    """
    n1, n2, n3 = dims
    p = np.asarray(p, dtype=float)
    if p.shape != (n1 * n3, n2 * n3):
        raise ValueError(f"matrix shape {p.shape} does not match dims {dims}")
    out = np.empty((n1, n2, n3))
    out[:, :, n3 - 1] = p[(n3 - 1) * n1:, :n2]
    for i in range(n3 - 2, -1, -1):
        out[:, :, i] = p[i * n1:(i + 1) * n1, :n2] - out[:, :, i + 1]
    return out


def oracle_product(a: np.ndarray, b: np.ndarray, max_rows: int = DEFAULT_MAT_CAP) -> np.ndarray:
    """Definitional tensor product: ten(mat(a) @ mat(b)).

    Intended for small instances; materializes both structured matrices.
    """
    a = check_tensor3(a)
    b = check_tensor3(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions do not match: {a.shape} vs {b.shape}")
    if a.shape[2] != b.shape[2]:
        raise ValueError(f"tube lengths do not match: {a.shape[2]} vs {b.shape[2]}")
    prod = mat(a, max_rows=max_rows) @ mat(b, max_rows=max_rows)
    return ten(prod, (a.shape[0], b.shape[1], a.shape[2]))
