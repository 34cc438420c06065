"""Mode-3 cosine transform underlying the tensor c-product.

The tube transform is the invertible matrix M = W^-1 C (I + Z), where C is
the orthogonal DCT-II matrix, W holds C's first column on its diagonal and
Z has ones on the first superdiagonal.  Applying M along the third mode of
a tensor block-diagonalizes its Toeplitz-plus-Hankel matricization, which
is what turns the c-product into independent frontal-slice products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["dct_matrix", "TubeTransform", "make_transform", "transform_mode3"]


def dct_matrix(n: int) -> np.ndarray:
    """Orthogonal DCT-II matrix of order n.

    Entry (i, j), 1-based, is sqrt((2 - delta_{i1})/n) * cos((i-1)(2j-1)pi/(2n)).
    """
    if n < 1:
        raise ValueError(f"matrix order must be positive, got {n}")
    i = np.arange(1, n + 1, dtype=float)[:, None]
    j = np.arange(1, n + 1, dtype=float)[None, :]
    scale = np.sqrt((2.0 - (i == 1.0)) / n)
    return scale * np.cos((i - 1.0) * (2.0 * j - 1.0) * np.pi / (2.0 * n))


@dataclass(frozen=True)
class TubeTransform:
    """Forward/inverse matrix pair applied along tube fibers."""

    size: int
    forward: np.ndarray
    inverse: np.ndarray


def make_transform(n3: int) -> TubeTransform:
    """Build the tube transform pair (M, M^-1) of order n3.

    M is never orthogonal for n3 > 1, so the inverse is computed by dense
    inversion rather than a transpose.  Tube lengths in practice are tiny
    (3 for RGB imagery), so this costs nothing.
    """
    if n3 < 1:
        raise ValueError(f"tube length must be positive, got {n3}")
    c = dct_matrix(n3)
    w = c[:, 0]  # strictly positive: cos((i-1)pi/(2n)) > 0 for i <= n
    iz = np.eye(n3) + np.diag(np.ones(n3 - 1), 1)
    forward = (c @ iz) / w[:, None]
    inverse = np.linalg.inv(forward)
    return TubeTransform(size=n3, forward=forward, inverse=inverse)


@lru_cache(maxsize=64)
def _cached_transform(n3: int) -> TubeTransform:
    return make_transform(n3)


def transform_mode3(a: np.ndarray, t: TubeTransform, direction: str = "forward") -> np.ndarray:
    """Multiply every tube a[i, j, :] by M (forward) or M^-1 (inverse)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={a.ndim}")
    if a.shape[2] != t.size:
        raise ValueError(f"tube length {a.shape[2]} does not match transform size {t.size}")
    if direction == "forward":
        m = t.forward
    elif direction == "inverse":
        m = t.inverse
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    # (a @ m.T)[i, j, l] = sum_k m[l, k] a[i, j, k]
    return a @ m.T
