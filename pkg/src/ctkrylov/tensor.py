"""Third-order tensor algebra built on the mode-3 cosine transform.

Tensors are plain ``numpy.ndarray`` objects of shape (n1, n2, n3) whose
frontal slices are ``a[:, :, k]``.  Bases (ordered collections of equally
sized tensors) are stacked along a leading axis, shape (m, n1, n2, n3).
"""

from __future__ import annotations

import numpy as np

from .transform import _cached_transform, transform_mode3

__all__ = [
    "check_tensor3",
    "cosine_product",
    "transpose",
    "inner",
    "fro_norm",
    "identity_tensor",
    "diamond",
    "basis_combine",
]


def check_tensor3(a: np.ndarray) -> np.ndarray:
    """Validate and return a third-order tensor with finite entries."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={a.ndim}")
    if any(d < 1 for d in a.shape):
        raise ValueError(f"all dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("tensor contains non-finite entries")
    return a


def cosine_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c-product of a (n1 x n2 x n3) and b (n2 x m x n3) tensors.

    Both inputs are transformed along tubes, the frontal slices are
    multiplied pairwise, and the result is transformed back.  Equals
    ten(mat(a) @ mat(b)) from :mod:`ctkrylov.matricize`.
    """
    a = check_tensor3(a)
    b = check_tensor3(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions do not match: {a.shape} vs {b.shape}")
    if a.shape[2] != b.shape[2]:
        raise ValueError(f"tube lengths do not match: {a.shape[2]} vs {b.shape[2]}")
    t = _cached_transform(a.shape[2])
    at = transform_mode3(a, t)
    bt = transform_mode3(b, t)
    # batched slice products with the slice index leading
    ct = np.matmul(at.transpose(2, 0, 1), bt.transpose(2, 0, 1)).transpose(1, 2, 0)
    return transform_mode3(ct, t, "inverse")


def transpose(a: np.ndarray) -> np.ndarray:
    """Slice-wise transpose; satisfies mat(transpose(a)) == mat(a).T."""
    return np.asarray(a).transpose(1, 0, 2)


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Entrywise inner product, computed in the spatial domain."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.vdot(a, b))


def fro_norm(a: np.ndarray) -> float:
    """Frobenius norm, sqrt(inner(a, a))."""
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def identity_tensor(n: int, n3: int) -> np.ndarray:
    """n x n x n3 tensor acting as the identity for the c-product.

    Constructed by inverse-transforming a stack of identity slices, so its
    forward transform has every frontal slice equal to I_n by definition.
    """
    if n < 1 or n3 < 1:
        raise ValueError(f"dimensions must be positive, got n={n}, n3={n3}")
    t = _cached_transform(n3)
    stack = np.repeat(np.eye(n)[:, :, None], n3, axis=2)
    return transform_mode3(stack, t, "inverse")


def _as_basis(blocks) -> np.ndarray:
    v = np.asarray(blocks, dtype=float)
    if v.ndim != 4:
        raise ValueError(f"expected a stack of third-order tensors, got ndim={v.ndim}")
    return v


def diamond(a, b) -> np.ndarray:
    """Matrix of pairwise inner products between two block bases.

    Entry (i, j) is inner(a[i], b[j]); for an orthonormal basis paired with
    itself this is the identity.
    """
    a = _as_basis(a)
    b = _as_basis(b)
    if a.shape[1:] != b.shape[1:]:
        raise ValueError(f"block shapes differ: {a.shape[1:]} vs {b.shape[1:]}")
    return np.einsum("iabc,jabc->ij", a, b)


def basis_combine(blocks, y: np.ndarray) -> np.ndarray:
    """Linear combination of basis blocks by a coefficient vector.

    A 1-D ``y`` of length m returns the single tensor sum_j y[j] * blocks[j];
    a 2-D (m x k) ``y`` applies each column and returns a stacked basis of k
    blocks.
    """
    v = _as_basis(blocks)
    y = np.asarray(y, dtype=float)
    if y.shape[0] != v.shape[0]:
        raise ValueError(f"coefficient length {y.shape[0]} != block count {v.shape[0]}")
    if y.ndim == 1:
        return np.tensordot(y, v, axes=(0, 0))
    if y.ndim == 2:
        return np.tensordot(y.T, v, axes=(1, 0))
    raise ValueError(f"coefficients must be a vector or matrix, got ndim={y.ndim}")
