"""Color-image blur model, noise injection, quality metrics and image I/O.

The forward model blurs each channel with banded Gaussian matrices and
mixes the channels through a 3x3 row-stochastic matrix.  Two realizations
are provided: the tensor sandwich operator used by the solvers, and a
dense Kronecker-product oracle that applies the channel-stacked matrix
(mixing kron within-row kron within-column) literally.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .operators import LinearTensorOperator, sandwich_operator
from .tensor import check_tensor3, fro_norm

__all__ = [
    "GaussianBlurSpec",
    "CrossChannelSpec",
    "BlurProblem",
    "gaussian_band_matrix",
    "build_blur_operator",
    "kron_oracle",
    "add_noise",
    "relative_error",
    "snr",
    "load_image",
    "save_image",
    "checkerboard",
    "radial_gradient",
    "random_smooth",
    "synthetic_image",
    "make_blur_problem",
]

DEFAULT_MIXING = np.array([
    [0.8, 0.1, 0.1],
    [0.1, 0.8, 0.1],
    [0.1, 0.1, 0.8],
])

KRON_ORACLE_MAX_SIZE = 64


@dataclass(frozen=True)
class GaussianBlurSpec:
    """Banded Gaussian within-channel blur: width sigma, band cutoff r."""

    size: int
    sigma: float
    bandwidth: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.bandwidth < 0 or self.bandwidth >= self.size:
            raise ValueError("bandwidth must satisfy 0 <= r < size")


@dataclass(frozen=True)
class CrossChannelSpec:
    """3x3 cross-channel mixing matrix, row-stochastic and circular-symmetric."""

    mixing: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mixing, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"mixing matrix must be 3x3, got {m.shape}")
        if not np.allclose(m.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("each row of the mixing matrix must sum to one")
        symmetric_circular = (
            np.isclose(m[0, 0], m[1, 1])
            and np.isclose(m[0, 0], m[2, 2])
            and np.isclose(m[0, 1], m[1, 0])
            and np.isclose(m[0, 2], m[2, 0])
            and np.isclose(m[1, 2], m[2, 1])
        )
        if not symmetric_circular:
            raise ValueError("only symmetric circular cross-channel mixing is supported")
        object.__setattr__(self, "mixing", m)


@dataclass
class BlurProblem:
    ground_truth: np.ndarray
    blurred_clean: np.ndarray
    observed: np.ndarray
    noise_level: float
    operator: LinearTensorOperator
    rng_seed: int
    blur_a: np.ndarray
    blur_b: np.ndarray


def gaussian_band_matrix(spec: GaussianBlurSpec) -> np.ndarray:
    """Symmetric banded Toeplitz matrix of truncated Gaussian weights.

    Entry (k, l) is exp(-(k-l)^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) inside
    the band |k-l| <= r and zero outside; no boundary renormalization.
    """
    n = spec.size
    offsets = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    weights = np.exp(-(offsets**2) / (2.0 * spec.sigma**2)) / (spec.sigma * np.sqrt(2.0 * np.pi))
    return np.where(offsets <= spec.bandwidth, weights, 0.0)


def build_blur_operator(within1: np.ndarray, within2: np.ndarray,
                        cross: CrossChannelSpec):
    """Assemble the blur tensors and the sandwich operator X -> A *c X *c B.

    The first tensor carries the vertical blur on every slice, scaled by the
    first column (alpha, beta, gamma) of the mixing matrix; the second
    carries the transposed horizontal blur on its first slice only.  The
    channel coupling this operator realizes is M^-1 diag(M (alpha, beta,
    gamma)) M in channel space, with M the tube transform.
    """
    within1 = np.asarray(within1, dtype=float)
    within2 = np.asarray(within2, dtype=float)
    if within1.shape != within2.shape or within1.shape[0] != within1.shape[1]:
        raise ValueError("within-channel blur matrices must be square and equally sized")
    n = within1.shape[0]
    alpha, beta, gamma = cross.mixing[0, 0], cross.mixing[1, 0], cross.mixing[2, 0]
    a = np.zeros((n, n, 3))
    a[:, :, 0] = alpha * within2
    a[:, :, 1] = beta * within2
    a[:, :, 2] = gamma * within2
    b = np.zeros((n, n, 3))
    b[:, :, 0] = within1.T
    return a, b, sandwich_operator(a, b)


def kron_oracle(within1: np.ndarray, within2: np.ndarray, cross: CrossChannelSpec,
                x: np.ndarray) -> np.ndarray:
    """Apply the dense channel-stacked blur matrix to an n x n x 3 tensor.

    Materializes mixing kron within1 kron within2 and multiplies it against
    the stacked per-channel vecs, then reshapes back.  Guarded to small n.
    """
    x = check_tensor3(x)
    n = x.shape[0]
    if x.shape != (n, n, 3):
        raise ValueError(f"expected an n x n x 3 tensor, got {x.shape}")
    if n > KRON_ORACLE_MAX_SIZE:
        raise ValueError(f"kron oracle limited to n <= {KRON_ORACLE_MAX_SIZE}, got {n}")
    big = np.kron(np.kron(cross.mixing, np.asarray(within1, dtype=float)),
                  np.asarray(within2, dtype=float))
    stacked = np.concatenate([x[:, :, k].ravel(order="F") for k in range(3)])
    out = big @ stacked
    result = np.empty_like(x)
    for k in range(3):
        result[:, :, k] = out[k * n * n:(k + 1) * n * n].reshape(n, n, order="F")
    return result


def add_noise(c_clean: np.ndarray, nu: float, seed: int = 0):
    """Add white noise rescaled so its norm is exactly nu times the signal norm."""
    if nu < 0:
        raise ValueError("noise level must be nonnegative")
    c_clean = check_tensor3(c_clean)
    if nu == 0.0:
        noise = np.zeros_like(c_clean)
        return c_clean.copy(), noise
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(c_clean.shape)
    noise *= nu * fro_norm(c_clean) / fro_norm(noise)
    return c_clean + noise, noise


def relative_error(restored: np.ndarray, truth: np.ndarray) -> float:
    """Frobenius-norm error of the restoration relative to the ground truth."""
    restored = np.asarray(restored, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if restored.shape != truth.shape:
        raise ValueError(f"shape mismatch: {restored.shape} vs {truth.shape}")
    denom = fro_norm(truth)
    if denom == 0.0:
        raise ValueError("ground truth tensor is zero")
    return fro_norm(truth - restored) / denom


def snr(restored: np.ndarray, truth: np.ndarray) -> float:
    """Signal-to-noise ratio in decibels of a restoration against the truth.

    The signal energy is the ground truth centered on its mean gray level;
    an exact match returns +inf.
    """
    restored = np.asarray(restored, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if restored.shape != truth.shape:
        raise ValueError(f"shape mismatch: {restored.shape} vs {truth.shape}")
    err = fro_norm(restored - truth)
    if err == 0.0:
        return float("inf")
    signal = fro_norm(truth - truth.mean())
    return 10.0 * np.log10(signal**2 / err**2)


def load_image(path) -> np.ndarray:
    """Read an 8-bit RGB PNG into an n x n x 3 tensor with values in [0, 1].

    Non-square images are center-cropped to the shorter side, with a warning.
    """
    with Image.open(path) as img:
        if img.mode != "RGB":
            raise ValueError(f"{path}: expected an RGB image, got mode {img.mode!r}")
        data = np.asarray(img, dtype=float) / 255.0
    h, w = data.shape[:2]
    if h != w:
        warnings.warn(f"{path}: center-cropping {h}x{w} image to a square")
        side = min(h, w)
        top, left = (h - side) // 2, (w - side) // 2
        data = data[top:top + side, left:left + side]
    return data


def save_image(t: np.ndarray, path) -> None:
    """Write a tensor as an 8-bit RGB PNG, clamping to [0, 1] then rounding."""
    t = check_tensor3(t)
    if t.shape[2] != 3:
        raise ValueError(f"expected 3 channels, got {t.shape[2]}")
    quantized = np.rint(np.clip(t, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="RGB").save(path, format="PNG")


def checkerboard(n: int, cell: int = 8) -> np.ndarray:
    """Checkerboard with distinct colors per channel; exercises hard edges."""
    idx = np.add.outer(np.arange(n) // cell, np.arange(n) // cell) % 2
    img = np.empty((n, n, 3))
    img[:, :, 0] = np.where(idx, 0.9, 0.1)
    img[:, :, 1] = np.where(idx, 0.2, 0.8)
    img[:, :, 2] = np.where(idx, 0.7, 0.3)
    return img


def radial_gradient(n: int) -> np.ndarray:
    """Smooth radial ramp, different phase per channel."""
    y, x = np.mgrid[0:n, 0:n]
    r = np.hypot(x - (n - 1) / 2, y - (n - 1) / 2) / (n / 2)
    img = np.empty((n, n, 3))
    img[:, :, 0] = np.clip(1.0 - r, 0.0, 1.0)
    img[:, :, 1] = np.clip(r, 0.0, 1.0)
    img[:, :, 2] = 0.5 + 0.5 * np.cos(np.pi * r)
    return np.clip(img, 0.0, 1.0)


def random_smooth(n: int, seed: int = 0) -> np.ndarray:
    """Seeded low-pass-filtered noise; textured but restorable.

    The smoothing width n/32 leaves enough mid-frequency content for
    regularized restorations to be meaningfully better than the blurred
    observation without being trivially easy.
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, n, 3))
    smooth = gaussian_band_matrix(GaussianBlurSpec(size=n, sigma=max(n / 32, 1.5),
                                                   bandwidth=min(n - 1, max(n // 4, 1))))
    out = np.empty_like(raw)
    for k in range(3):
        out[:, :, k] = smooth @ raw[:, :, k] @ smooth.T
    lo, hi = out.min(), out.max()
    return (out - lo) / (hi - lo)


_PATTERNS = {
    "checkerboard": checkerboard,
    "gradient": radial_gradient,
    "random-smooth": random_smooth,
}


def synthetic_image(pattern: str, n: int, seed: int = 0) -> np.ndarray:
    """Build one of the shipped synthetic test patterns by name."""
    if pattern not in _PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; choose from {sorted(_PATTERNS)}")
    if pattern == "random-smooth":
        return random_smooth(n, seed)
    return _PATTERNS[pattern](n)


def make_blur_problem(ground_truth: np.ndarray, sigma: float = 4.0, bandwidth: int = 6,
                      mixing: np.ndarray | None = None, noise_level: float = 1e-3,
                      seed: int = 0) -> BlurProblem:
    """Blur a ground-truth image and contaminate it at the given noise level."""
    ground_truth = check_tensor3(ground_truth)
    n = ground_truth.shape[0]
    if ground_truth.shape != (n, n, 3):
        raise ValueError(f"expected an n x n x 3 image tensor, got {ground_truth.shape}")
    spec = GaussianBlurSpec(size=n, sigma=sigma, bandwidth=bandwidth)
    cross = CrossChannelSpec(mixing=DEFAULT_MIXING if mixing is None else mixing)
    within = gaussian_band_matrix(spec)
    a, b, operator = build_blur_operator(within, within, cross)
    blurred = operator.apply(ground_truth)
    observed, _ = add_noise(blurred, noise_level, seed)
    return BlurProblem(
        ground_truth=ground_truth,
        blurred_clean=blurred,
        observed=observed,
        noise_level=noise_level,
        operator=operator,
        rng_seed=seed,
        blur_a=a,
        blur_b=b,
    )
