import numpy as np
import pytest

from ctkrylov.matricize import mat, ten
from ctkrylov.operators import left_product_operator, sandwich_operator
from ctkrylov.solvers import (
    SolverConfig,
    arnoldi,
    dc_gk,
    dc_gmres,
    dc_lsqr,
    golub_kahan,
)
from ctkrylov.tensor import (
    basis_combine,
    diamond,
    fro_norm,
    identity_tensor,
    transpose,
)


def random_square_op(seed, n=8, s=2, p=3, shift=0.0):
    rng = np.random.default_rng(seed)
    a = shift * identity_tensor(n, p) + rng.standard_normal((n, n, p))
    return left_product_operator(a, width=s), rng


def identity_op(n, s, p):
    return left_product_operator(identity_tensor(n, p), width=s)


class TestArnoldi:
    def test_identity_operator_breaks_down_immediately(self):
        op = identity_op(4, 2, 3)
        rng = np.random.default_rng(0)
        dec = arnoldi(op, rng.standard_normal((4, 2, 3)), 3)
        assert dec.breakdown_step == 1
        assert dec.hessenberg.shape == (2, 1)
        assert dec.hessenberg[0, 0] == pytest.approx(1.0)
        assert dec.hessenberg[1, 0] == 0.0

    def test_decomposition_relations(self):
        op, rng = random_square_op(1, n=6, s=2, p=3)
        seed = rng.standard_normal((6, 2, 3))
        m = 4
        dec = arnoldi(op, seed, m)
        v = dec.basis
        h = dec.hessenberg
        applied = np.stack([op.apply(v[j]) for j in range(m)])

        # expansion through the extended basis
        assert np.abs(applied - basis_combine(v, h)).max() < 1e-10
        # expansion through the square part plus the trailing term
        tail = np.zeros_like(applied)
        tail[m - 1] = h[m, m - 1] * v[m]
        assert np.abs(applied - basis_combine(v[:m], h[:m]) - tail).max() < 1e-10
        # projected matrices
        assert np.abs(diamond(v[:m], applied) - h[:m]).max() < 1e-10
        assert np.abs(diamond(v, applied) - h).max() < 1e-10
        # orthonormality and the norm identity
        assert np.abs(diamond(v, v) - np.eye(m + 1)).max() < 1e-10
        y = rng.standard_normal(m)
        assert fro_norm(basis_combine(v[:m], y)) == pytest.approx(
            np.linalg.norm(y), rel=1e-10
        )

    def test_zero_seed_rejected(self):
        op = identity_op(3, 2, 2)
        with pytest.raises(ValueError):
            arnoldi(op, np.zeros((3, 2, 2)), 2)

    def test_rectangular_operator_rejected(self):
        rng = np.random.default_rng(2)
        op = left_product_operator(rng.standard_normal((4, 3, 2)), width=2)
        with pytest.raises(ValueError):
            arnoldi(op, rng.standard_normal((3, 2, 2)), 2)


class TestGolubKahan:
    def test_identity_operator_breaks_down(self):
        op = identity_op(4, 2, 3)
        rng = np.random.default_rng(3)
        c = rng.standard_normal((4, 2, 3))
        c /= fro_norm(c)
        dec = golub_kahan(op, c, 3)
        assert dec.breakdown_step == 1
        assert dec.alphas[0] == pytest.approx(1.0)
        assert dec.bidiag.shape == (2, 1)
        assert dec.bidiag[1, 0] == 0.0

    def test_decomposition_relations(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((6, 5, 3))
        op = left_product_operator(a, width=2)
        c = rng.standard_normal((6, 2, 3))
        m = 4
        dec = golub_kahan(op, c, m)
        assert dec.breakdown_step is None
        u, v = dec.u_basis, dec.v_basis

        applied = np.stack([op.apply(v[j]) for j in range(m)])
        assert np.abs(applied - basis_combine(u, dec.bidiag)).max() < 1e-10

        # adjoint recurrence through the square bidiagonal part
        adj = np.stack([op.apply_adjoint(u[j]) for j in range(m)])
        square = dec.bidiag[:m]
        assert np.abs(adj - basis_combine(v[:m], square.T)).max() < 1e-10

        e1 = np.zeros(u.shape[0])
        e1[0] = dec.beta1
        assert np.abs(basis_combine(u, e1) - c).max() < 1e-12

        z = rng.standard_normal(u.shape[0])
        assert fro_norm(basis_combine(u, z)) == pytest.approx(
            np.linalg.norm(z), rel=1e-10
        )
        assert np.abs(diamond(u, u) - np.eye(u.shape[0])).max() < 1e-10
        assert np.abs(diamond(v, v) - np.eye(v.shape[0])).max() < 1e-10

    def test_bidiagonal_sparsity(self):
        rng = np.random.default_rng(5)
        op = left_product_operator(rng.standard_normal((7, 6, 2)), width=2)
        dec = golub_kahan(op, rng.standard_normal((7, 2, 2)), 5)
        b = dec.bidiag
        mask = np.ones_like(b, dtype=bool)
        m = b.shape[1]
        mask[np.arange(m), np.arange(m)] = False
        mask[np.arange(1, m + 1), np.arange(m)] = False
        assert np.all(b[mask] == 0.0)

    def test_zero_rhs_rejected(self):
        op = identity_op(3, 2, 2)
        with pytest.raises(ValueError):
            golub_kahan(op, np.zeros((3, 2, 2)), 2)


class TestGmres:
    def test_exact_initial_guess_stops_immediately(self):
        op, rng = random_square_op(6, shift=3.0)
        x = rng.standard_normal(op.domain_dims)
        c = op.apply(x)
        rep = dc_gmres(op, c, x0=x, cfg=SolverConfig(tolerance=1e-8))
        assert rep.iterations_used == 0
        assert rep.termination_reason == "tolerance"
        assert rep.residual_history[0] < 1e-10 * fro_norm(c)

    def test_exactness_on_well_conditioned_system(self):
        op, rng = random_square_op(7, shift=4.0)
        c = op.apply(rng.standard_normal(op.domain_dims))
        dim = int(np.prod(op.domain_dims))
        cfg = SolverConfig(restart_m=dim, max_outer_iterations=2,
                           tolerance=1e-9, lambda_mode=0.0)
        rep = dc_gmres(op, c, cfg=cfg)
        assert rep.residual_history[-1] / fro_norm(c) < 1e-9

    def test_residuals_nonincreasing_without_regularization(self):
        op, rng = random_square_op(8, shift=3.0)
        c = op.apply(rng.standard_normal(op.domain_dims))
        cfg = SolverConfig(restart_m=6, max_outer_iterations=6,
                           tolerance=1e-14, lambda_mode=0.0)
        rep = dc_gmres(op, c, cfg=cfg)
        hist = rep.residual_history
        assert all(a >= b - 1e-10 * hist[0] for a, b in zip(hist, hist[1:]))

    def test_gcv_lambdas_positive_on_noisy_problem(self):
        op, rng = random_square_op(9, shift=1.0)
        c = op.apply(rng.standard_normal(op.domain_dims))
        c += 1e-3 * fro_norm(c) * rng.standard_normal(c.shape) / np.sqrt(c.size)
        rep = dc_gmres(op, c, cfg=SolverConfig(restart_m=5, max_outer_iterations=3))
        assert rep.lambda_history
        assert all(lam > 0 for lam in rep.lambda_history)

    def test_breakdown_stops_with_current_iterate(self):
        op = identity_op(4, 2, 3)
        rng = np.random.default_rng(10)
        c = rng.standard_normal((4, 2, 3))
        rep = dc_gmres(op, c, cfg=SolverConfig(restart_m=5, lambda_mode=0.0,
                                               tolerance=1e-12))
        assert rep.termination_reason == "tolerance"
        assert rep.residual_history[-1] < 1e-12 * fro_norm(c)

    def test_zero_rhs_rejected(self):
        op = identity_op(3, 2, 2)
        with pytest.raises(ValueError):
            dc_gmres(op, np.zeros((3, 2, 2)))


class TestGk:
    def test_matches_dense_solve_on_tiny_system(self):
        rng = np.random.default_rng(11)
        a = 3.0 * identity_tensor(4, 2) + rng.standard_normal((4, 4, 2))
        op = left_product_operator(a, width=2)
        x_true = rng.standard_normal((4, 2, 2))
        c = op.apply(x_true)
        # definitional dense solve through the matricization
        x_direct = ten(np.linalg.solve(mat(a), mat(c)), c.shape)
        rep = dc_gk(op, c, cfg=SolverConfig(max_inner_steps=16, lambda_mode=0.0))
        assert fro_norm(rep.solution - x_direct) / fro_norm(x_direct) < 1e-8

    def test_exact_at_full_subspace(self):
        op, rng = random_square_op(12, shift=3.0)
        c = op.apply(rng.standard_normal(op.domain_dims))
        dim = int(np.prod(op.domain_dims))
        rep = dc_gk(op, c, cfg=SolverConfig(max_inner_steps=dim, lambda_mode=0.0))
        assert rep.residual_history[-1] / fro_norm(c) < 1e-8

    def test_report_shape(self):
        op, rng = random_square_op(13, shift=2.0)
        c = op.apply(rng.standard_normal(op.domain_dims))
        rep = dc_gk(op, c, cfg=SolverConfig(max_inner_steps=6))
        assert rep.iterations_used == 6
        assert len(rep.residual_history) == 1
        assert len(rep.lambda_history) == 1
        assert rep.lambda_history[0] >= 0


class TestLsqr:
    def test_identity_operator_single_step(self):
        op = identity_op(4, 2, 3)
        rng = np.random.default_rng(14)
        c = rng.standard_normal((4, 2, 3))
        c /= fro_norm(c)
        rep = dc_lsqr(op, c, cfg=SolverConfig(tolerance=1e-12))
        assert rep.iterations_used == 1
        assert np.abs(rep.solution - c).max() < 1e-12

    def test_residual_recurrence_matches_explicit(self):
        rng = np.random.default_rng(15)
        a = 2.0 * identity_tensor(12, 3) + rng.standard_normal((12, 12, 3))
        op = left_product_operator(a, width=2)
        c = rng.standard_normal((12, 2, 3))
        iterates = {}
        rep = dc_lsqr(op, c, cfg=SolverConfig(max_inner_steps=15, tolerance=1e-30),
                      callback=lambda k, x: iterates.__setitem__(k, x.copy()))
        for k, x in iterates.items():
            explicit = fro_norm(c - op.apply(x))
            assert abs(rep.residual_history[k - 1] - explicit) / explicit < 1e-8

    def test_residuals_nonincreasing(self):
        rng = np.random.default_rng(16)
        op = left_product_operator(rng.standard_normal((9, 7, 3)), width=2)
        c = rng.standard_normal((9, 2, 3))
        rep = dc_lsqr(op, c, cfg=SolverConfig(max_inner_steps=20, tolerance=1e-30))
        hist = rep.residual_history
        assert all(a >= b - 1e-12 * hist[0] for a, b in zip(hist, hist[1:]))

    def test_agrees_with_gk_at_same_subspace(self):
        rng = np.random.default_rng(17)
        a = 3.0 * identity_tensor(5, 2) + 0.5 * rng.standard_normal((5, 5, 2))
        op = left_product_operator(a, width=2)
        c = op.apply(rng.standard_normal((5, 2, 2)))
        m = 8
        gk = dc_gk(op, c, cfg=SolverConfig(max_inner_steps=m, lambda_mode=0.0))
        ls = dc_lsqr(op, c, cfg=SolverConfig(tolerance=1e-30, k_opt_mode=m))
        assert fro_norm(gk.solution - ls.solution) / fro_norm(gk.solution) < 1e-8

    def test_exactness_within_full_subspace(self):
        op, rng = random_square_op(18, shift=4.0)
        c = op.apply(rng.standard_normal(op.domain_dims))
        dim = int(np.prod(op.domain_dims))
        rep = dc_lsqr(op, c, cfg=SolverConfig(max_inner_steps=dim, tolerance=1e-9))
        assert rep.residual_history[-1] / fro_norm(c) < 1e-8

    def test_fixed_step_count(self):
        rng = np.random.default_rng(19)
        op = left_product_operator(rng.standard_normal((8, 6, 2)), width=2)
        c = rng.standard_normal((8, 2, 2))
        rep = dc_lsqr(op, c, cfg=SolverConfig(tolerance=1e-30, k_opt_mode=7))
        assert rep.iterations_used == 7

    def test_lcurve_mode_sets_k_opt(self):
        rng = np.random.default_rng(20)
        a = rng.standard_normal((10, 10, 2))
        op = left_product_operator(a, width=2)
        x = rng.standard_normal((10, 2, 2))
        c = op.apply(x)
        c += 1e-2 * fro_norm(c) * rng.standard_normal(c.shape) / np.sqrt(c.size)
        cap = 20
        rep = dc_lsqr(op, c, cfg=SolverConfig(max_inner_steps=cap, tolerance=1e-12,
                                              k_opt_mode="lcurve"))
        assert rep.termination_reason == "lcurve_corner"
        assert rep.k_opt is not None and 1 <= rep.k_opt <= cap
        # the returned solution is the iterate at the selected step
        again = dc_lsqr(op, c, cfg=SolverConfig(tolerance=1e-12, k_opt_mode=rep.k_opt))
        assert np.abs(rep.solution - again.solution).max() < 1e-10

    def test_zero_rhs_rejected(self):
        op = identity_op(3, 2, 2)
        with pytest.raises(ValueError):
            dc_lsqr(op, np.zeros((3, 2, 2)))


class TestSandwichSolve:
    def test_gmres_on_sandwich_operator(self):
        # the tube transform amplifies raw perturbations by its row weights,
        # so the identity shift has to dominate in the transform domain
        rng = np.random.default_rng(21)
        a = 4.0 * identity_tensor(6, 3) + 0.1 * rng.standard_normal((6, 6, 3))
        b = 4.0 * identity_tensor(6, 3) + 0.1 * rng.standard_normal((6, 6, 3))
        op = sandwich_operator(a, b)
        x_true = rng.standard_normal((6, 6, 3))
        c = op.apply(x_true)
        cfg = SolverConfig(restart_m=30, max_outer_iterations=8,
                           tolerance=1e-9, lambda_mode=0.0)
        rep = dc_gmres(op, c, cfg=cfg)
        assert rep.residual_history[-1] / fro_norm(c) < 1e-9

    def test_lsqr_on_sandwich_operator(self):
        rng = np.random.default_rng(22)
        a = 4.0 * identity_tensor(5, 3) + 0.1 * rng.standard_normal((5, 5, 3))
        b = 4.0 * identity_tensor(5, 3) + 0.1 * rng.standard_normal((5, 5, 3))
        op = sandwich_operator(a, b)
        c = op.apply(rng.standard_normal((5, 5, 3)))
        rep = dc_lsqr(op, c, cfg=SolverConfig(max_inner_steps=75, tolerance=1e-9))
        assert rep.residual_history[-1] / fro_norm(c) < 1e-8


class TestConfigValidation:
    def test_bad_restart(self):
        with pytest.raises(ValueError):
            SolverConfig(restart_m=0)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            SolverConfig(tolerance=0.0)

    def test_bad_lambda_mode(self):
        with pytest.raises(ValueError):
            SolverConfig(lambda_mode="magic")
        with pytest.raises(ValueError):
            SolverConfig(lambda_mode=-1.0)

    def test_bad_kopt_mode(self):
        with pytest.raises(ValueError):
            SolverConfig(k_opt_mode="corner")
