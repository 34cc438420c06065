"""Self-check suites runnable from the command line.

Each check re-verifies one library invariant at small scale and reports a
named pass/fail result.  The quick suite is the oracle cross-validation of
the fast product plus adjoint checks; the full suite adds the decomposition
identities, the regularization oracles and the imaging contracts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import imaging, matricize, operators, regularization, solvers, tensor

__all__ = ["CheckResult", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, value: float, bound: float) -> CheckResult:
    return CheckResult(name, bool(value <= bound), f"{value:.3e} (bound {bound:.0e})")


def _check_product_oracle(rng) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        n1, n2, n3, m = rng.integers(1, 6, size=4)
        a = rng.standard_normal((n1, n2, n3))
        b = rng.standard_normal((n2, m, n3))
        ref = matricize.oracle_product(a, b)
        err = np.linalg.norm(tensor.cosine_product(a, b) - ref)
        worst = max(worst, err / max(np.linalg.norm(ref), 1e-30))
    return _result("product matches matricized oracle", worst, 1e-10)


def _check_transpose_contract(rng) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        a = rng.standard_normal(tuple(rng.integers(1, 6, size=3)))
        diff = np.abs(matricize.mat(tensor.transpose(a)) - matricize.mat(a).T).max()
        worst = max(worst, diff)
    return _result("transpose matches matricized transpose", worst, 1e-12)


def _check_round_trip(rng) -> CheckResult:
    from .transform import _cached_transform, transform_mode3

    worst = 0.0
    for _ in range(10):
        a = rng.standard_normal(tuple(rng.integers(1, 7, size=3)))
        t = _cached_transform(a.shape[2])
        back = transform_mode3(transform_mode3(a, t), t, "inverse")
        worst = max(worst, np.abs(back - a).max())
    return _result("tube transform round trip", worst, 1e-12)


def _check_identity_laws(rng) -> CheckResult:
    a = rng.standard_normal((4, 3, 3))
    left = tensor.cosine_product(tensor.identity_tensor(4, 3), a)
    right = tensor.cosine_product(a, tensor.identity_tensor(3, 3))
    worst = max(np.abs(left - a).max(), np.abs(right - a).max())
    return _result("identity tensor laws", worst, 1e-12)


def _check_adjoints(rng) -> CheckResult:
    op1 = operators.left_product_operator(rng.standard_normal((6, 5, 4)), width=2)
    op2 = operators.sandwich_operator(rng.standard_normal((5, 4, 3)),
                                      rng.standard_normal((2, 6, 3)))
    worst = max(operators.adjoint_check(op1, trials=10),
                operators.adjoint_check(op2, trials=10))
    return _result("operator adjoint identity", worst, 1e-10)


def _check_arnoldi_relations(rng) -> CheckResult:
    op = operators.left_product_operator(rng.standard_normal((8, 8, 3)), width=2)
    dec = solvers.arnoldi(op, rng.standard_normal((8, 2, 3)), 5)
    v = dec.basis
    worst = np.abs(tensor.diamond(v, v) - np.eye(v.shape[0])).max()
    applied = np.stack([op.apply(v[j]) for j in range(dec.hessenberg.shape[1])])
    worst = max(worst, np.abs(applied - tensor.basis_combine(v, dec.hessenberg)).max())
    return _result("Arnoldi decomposition relations", worst, 1e-10)


def _check_bidiag_relations(rng) -> CheckResult:
    op = operators.left_product_operator(rng.standard_normal((6, 5, 3)), width=2)
    c = rng.standard_normal((6, 2, 3))
    dec = solvers.golub_kahan(op, c, 4)
    m_eff = dec.bidiag.shape[1]
    applied = np.stack([op.apply(dec.v_basis[j]) for j in range(m_eff)])
    worst = np.abs(applied - tensor.basis_combine(dec.u_basis, dec.bidiag)).max()
    e1 = np.zeros(dec.u_basis.shape[0])
    e1[0] = dec.beta1
    worst = max(worst, np.abs(tensor.basis_combine(dec.u_basis, e1) - c).max())
    return _result("bidiagonalization relations", worst, 1e-10)


def _check_gcv_scan(rng) -> CheckResult:
    worst = 0.0
    accepted = 0
    while accepted < 5:
        sigma = rng.uniform(0.5, 2.0) * np.geomspace(1.0, 1e-5, 12)
        noise = 10.0 ** rng.uniform(-2.0, -1.0)
        gtilde = np.append(sigma * rng.standard_normal(12), 0.0)
        gtilde += noise * rng.standard_normal(13)
        curve = regularization.GcvCurve(sigma=sigma, gtilde=gtilde)
        grid = np.geomspace(1e-12 * sigma[0], sigma[0], 20000)
        denoms = sigma[None, :] ** 2 + grid[:, None] ** 2
        values = ((gtilde[:12][None, :] / denoms) ** 2).sum(1) / (1.0 / denoms).sum(1) ** 2
        idx = int(np.argmin(values))
        # only curves whose optimum is interior and uniquely localized make
        # a lambda comparison meaningful; flat valleys tie at machine level
        near = np.flatnonzero(values <= values[idx] * (1.0 + 1e-9))
        if not 1 <= idx <= grid.size - 2 or near.min() < idx - 1 or near.max() > idx + 1:
            continue
        accepted += 1
        lam = regularization.minimize_gcv(curve)
        worst = max(worst, abs(lam - grid[idx]) / grid[idx])
    return _result("GCV minimizer vs dense scan", worst, 1e-2)


def _check_tikhonov_normal_equations(rng) -> CheckResult:
    worst = 0.0
    for _ in range(5):
        m = rng.integers(2, 8)
        mat_ = rng.standard_normal((m + 1, m))
        lam = float(rng.uniform(0.01, 1.0))
        y = regularization.tikhonov_solve(mat_, 1.0, lam)
        e1 = np.zeros(m + 1)
        e1[0] = 1.0
        lhs = (mat_.T @ mat_ + lam**2 * np.eye(m)) @ y
        rhs = mat_.T @ e1
        worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    return _result("Tikhonov solve satisfies normal equations", worst, 1e-10)


def _check_lsqr_residual_identity(rng) -> CheckResult:
    a = 2.0 * tensor.identity_tensor(10, 3) + 0.3 * rng.standard_normal((10, 10, 3))
    op = operators.left_product_operator(a, width=2)
    c = rng.standard_normal((10, 2, 3))
    rep = solvers.dc_lsqr(op, c, cfg=solvers.SolverConfig(max_inner_steps=15, tolerance=1e-30))
    worst = 0.0
    for k in range(1, rep.iterations_used + 1):
        partial = solvers.dc_lsqr(op, c, cfg=solvers.SolverConfig(tolerance=1e-30, k_opt_mode=k))
        explicit = tensor.fro_norm(c - op.apply(partial.solution))
        worst = max(worst, abs(rep.residual_history[k - 1] - explicit) / explicit)
    return _result("LSQR residual recurrence identity", worst, 1e-8)


def _check_noise_level(rng) -> CheckResult:
    clean = rng.uniform(0.1, 1.0, size=(12, 12, 3))
    _, noise = imaging.add_noise(clean, 1e-3, seed=5)
    ratio = tensor.fro_norm(noise) / tensor.fro_norm(clean)
    return _result("noise level exactness", abs(ratio - 1e-3), 1e-15)


def _check_identity_mixing_model(rng) -> CheckResult:
    # with no cross-channel mixing the sandwich operator must match the
    # dense channel-stacked oracle exactly
    n = 8
    spec = imaging.GaussianBlurSpec(size=n, sigma=2.0, bandwidth=3)
    within = imaging.gaussian_band_matrix(spec)
    cross = imaging.CrossChannelSpec(mixing=np.eye(3))
    _, _, op = imaging.build_blur_operator(within, within, cross)
    x = rng.standard_normal((n, n, 3))
    ref = imaging.kron_oracle(within, within, cross, x)
    err = tensor.fro_norm(op.apply(x) - ref) / tensor.fro_norm(ref)
    return _result("within-channel blur matches dense oracle", err, 1e-10)


_QUICK = [
    _check_product_oracle,
    _check_transpose_contract,
    _check_round_trip,
    _check_identity_laws,
    _check_adjoints,
]

_FULL_EXTRA = [
    _check_arnoldi_relations,
    _check_bidiag_relations,
    _check_gcv_scan,
    _check_tikhonov_normal_equations,
    _check_lsqr_residual_identity,
    _check_noise_level,
    _check_identity_mixing_model,
]


def run_checks(level: str = "quick", seed: int = 0) -> list[CheckResult]:
    """Run the named invariant suite; 'full' includes everything in 'quick'."""
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    rng = np.random.default_rng(seed)
    suite = list(_QUICK) + (list(_FULL_EXTRA) if level == "full" else [])
    return [check(rng) for check in suite]
