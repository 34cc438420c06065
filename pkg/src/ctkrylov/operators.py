"""Linear tensor operators and adjoint verification.

Solvers never see raw tensors on the operator side; they receive a pair of
callables (apply, apply_adjoint) so that X -> A *c X and the sandwich
X -> A *c X *c B share one code path.

The adjoint needs care.  The tube transform M is not orthogonal, so the
slice-transposed product A^T *c Y is NOT the adjoint of X -> A *c X under
the entrywise inner product (its defect is O(1)).  The true adjoint is
computed in the transform domain with transposed slice actions and the
contragredient tube transforms: tubes go in through M^-T and come back
out through M^T.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .tensor import check_tensor3, fro_norm, inner
from .transform import _cached_transform

__all__ = [
    "LinearTensorOperator",
    "left_product_operator",
    "sandwich_operator",
    "adjoint_check",
]

Dims = tuple[int, int, int]


@dataclass(frozen=True)
class LinearTensorOperator:
    apply: Callable[[np.ndarray], np.ndarray]
    apply_adjoint: Callable[[np.ndarray], np.ndarray]
    domain_dims: Dims
    range_dims: Dims

    @property
    def is_square(self) -> bool:
        return self.domain_dims == self.range_dims


def _slice_leading(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.transpose(2, 0, 1))


def _slice_trailing(a: np.ndarray) -> np.ndarray:
    return a.transpose(1, 2, 0)


def left_product_operator(a: np.ndarray, width: int) -> LinearTensorOperator:
    """Operator X -> a *c X on tensors of shape (a.n2, width, a.n3)."""
    a = check_tensor3(a)
    n1, n2, n3 = a.shape
    t = _cached_transform(n3)
    at = _slice_leading(a @ t.forward.T)  # transform-domain slices, slice axis first
    att = at.transpose(0, 2, 1)

    def apply(x: np.ndarray) -> np.ndarray:
        xt = _slice_leading(np.asarray(x, dtype=float) @ t.forward.T)
        return _slice_trailing(at @ xt) @ t.inverse.T

    def apply_adjoint(y: np.ndarray) -> np.ndarray:
        # tubes through M^-T on the way in, M^T on the way out
        yt = _slice_leading(np.asarray(y, dtype=float) @ t.inverse)
        return _slice_trailing(att @ yt) @ t.forward

    return LinearTensorOperator(
        apply=apply,
        apply_adjoint=apply_adjoint,
        domain_dims=(n2, width, n3),
        range_dims=(n1, width, n3),
    )


def sandwich_operator(a: np.ndarray, b: np.ndarray) -> LinearTensorOperator:
    """Operator X -> a *c X *c b with its exact adjoint."""
    a = check_tensor3(a)
    b = check_tensor3(b)
    if a.shape[2] != b.shape[2]:
        raise ValueError(f"tube lengths differ: {a.shape[2]} vs {b.shape[2]}")
    n3 = a.shape[2]
    t = _cached_transform(n3)
    at = _slice_leading(a @ t.forward.T)
    bt = _slice_leading(b @ t.forward.T)
    att = at.transpose(0, 2, 1)
    btt = bt.transpose(0, 2, 1)

    def apply(x: np.ndarray) -> np.ndarray:
        xt = _slice_leading(np.asarray(x, dtype=float) @ t.forward.T)
        return _slice_trailing(at @ xt @ bt) @ t.inverse.T

    def apply_adjoint(y: np.ndarray) -> np.ndarray:
        yt = _slice_leading(np.asarray(y, dtype=float) @ t.inverse)
        return _slice_trailing(att @ yt @ btt) @ t.forward

    return LinearTensorOperator(
        apply=apply,
        apply_adjoint=apply_adjoint,
        domain_dims=(a.shape[1], b.shape[0], n3),
        range_dims=(a.shape[0], b.shape[1], n3),
    )


def adjoint_check(op: LinearTensorOperator, trials: int = 10, seed: int = 0) -> float:
    """Largest relative defect of <op(X), Y> == <X, op^T(Y)> over random pairs."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(op.domain_dims)
        y = rng.standard_normal(op.range_dims)
        ax = op.apply(x)
        defect = abs(inner(ax, y) - inner(x, op.apply_adjoint(y)))
        scale = fro_norm(ax) * fro_norm(y)
        worst = max(worst, defect / scale if scale > 0 else defect)
    return worst
