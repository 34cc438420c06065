"""Third-order tensor linear algebra over the cosine transform product,
with regularized Krylov solvers and a color-image deblurring layer."""

from .imaging import (
    BlurProblem,
    CrossChannelSpec,
    GaussianBlurSpec,
    add_noise,
    build_blur_operator,
    gaussian_band_matrix,
    kron_oracle,
    load_image,
    make_blur_problem,
    relative_error,
    save_image,
    snr,
    synthetic_image,
)
from .matricize import mat, oracle_product, ten
from .operators import (
    LinearTensorOperator,
    adjoint_check,
    left_product_operator,
    sandwich_operator,
)
from .regularization import (
    GcvCurve,
    gcv_curve_from_matrix,
    gcv_value,
    lcurve_corner,
    minimize_gcv,
    tikhonov_solve,
)
from .serialize import load_tensor, save_tensor
from .solvers import (
    ArnoldiDecomposition,
    BidiagDecomposition,
    SolverConfig,
    SolverReport,
    arnoldi,
    dc_gk,
    dc_gmres,
    dc_lsqr,
    golub_kahan,
)
from .tensor import (
    basis_combine,
    cosine_product,
    diamond,
    fro_norm,
    identity_tensor,
    inner,
    transpose,
)
from .transform import TubeTransform, dct_matrix, make_transform, transform_mode3

__version__ = "0.1.0"

__all__ = [
    "ArnoldiDecomposition",
    "BidiagDecomposition",
    "BlurProblem",
    "CrossChannelSpec",
    "GaussianBlurSpec",
    "GcvCurve",
    "LinearTensorOperator",
    "SolverConfig",
    "SolverReport",
    "TubeTransform",
    "add_noise",
    "adjoint_check",
    "arnoldi",
    "basis_combine",
    "build_blur_operator",
    "cosine_product",
    "dc_gk",
    "dc_gmres",
    "dc_lsqr",
    "dct_matrix",
    "diamond",
    "fro_norm",
    "gaussian_band_matrix",
    "gcv_curve_from_matrix",
    "gcv_value",
    "golub_kahan",
    "identity_tensor",
    "inner",
    "kron_oracle",
    "lcurve_corner",
    "left_product_operator",
    "load_image",
    "load_tensor",
    "make_blur_problem",
    "make_transform",
    "mat",
    "minimize_gcv",
    "oracle_product",
    "relative_error",
    "sandwich_operator",
    "save_image",
    "save_tensor",
    "snr",
    "synthetic_image",
    "ten",
    "tikhonov_solve",
    "transform_mode3",
    "transpose",
]
