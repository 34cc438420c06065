"""Tensor Krylov solvers over the c-product.

Three methods share the operator abstraction from :mod:`ctkrylov.operators`:

* restarted GMRES with a Tikhonov-regularized projected solve per cycle,
* Golub-Kahan bidiagonalization followed by one projected Tikhonov solve,
* LSQR driven by plane rotations, optionally stopped at the corner of its
  residual/solution-norm curve.

All orthonormalization uses tensor inner products (global Krylov style);
one classical reorthogonalization pass is applied whenever cancellation
eats more than a factor 1/sqrt(2) of a new block's norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import LinearTensorOperator
from .regularization import gcv_curve_from_matrix, lcurve_corner, minimize_gcv, tikhonov_solve
from .tensor import basis_combine, fro_norm, inner

__all__ = [
    "SolverConfig",
    "SolverReport",
    "ArnoldiDecomposition",
    "BidiagDecomposition",
    "arnoldi",
    "golub_kahan",
    "dc_gmres",
    "dc_gk",
    "dc_lsqr",
]

BREAKDOWN_REL = 1e-14  # norms below this times the seed norm count as exact breakdown
REORTH_DROP = 1.0 / np.sqrt(2.0)


@dataclass
class SolverConfig:
    """Knobs shared by the three solvers; fields unused by a method are ignored."""

    restart_m: int = 10
    max_outer_iterations: int = 10
    tolerance: float = 1e-6
    max_inner_steps: int | None = None  # defaults to 20 for GK, 50 for LSQR
    lambda_mode: float | str = "gcv"
    rng_seed: int = 0
    k_opt_mode: int | str | None = None  # LSQR: fixed step count or "lcurve"
    reorthogonalize: bool = True

    def __post_init__(self):
        if self.restart_m < 1:
            raise ValueError("restart_m must be at least 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if isinstance(self.lambda_mode, str):
            if self.lambda_mode != "gcv":
                raise ValueError(f"unknown lambda mode {self.lambda_mode!r}")
        elif self.lambda_mode < 0:
            raise ValueError("fixed lambda must be nonnegative")
        if isinstance(self.k_opt_mode, str) and self.k_opt_mode != "lcurve":
            raise ValueError(f"unknown k_opt mode {self.k_opt_mode!r}")


@dataclass
class SolverReport:
    solution: np.ndarray
    residual_history: list[float]
    lambda_history: list[float]
    solution_norm_history: list[float]
    iterations_used: int
    termination_reason: str
    k_opt: int | None = None


@dataclass
class ArnoldiDecomposition:
    basis: np.ndarray  # (j, n, s, p) orthonormal blocks
    hessenberg: np.ndarray  # (j+1, j) or truncated with a zero final row
    beta: float
    breakdown_step: int | None = None


@dataclass
class BidiagDecomposition:
    u_basis: np.ndarray
    v_basis: np.ndarray
    bidiag: np.ndarray  # (m_eff+1, m_eff) lower bidiagonal
    beta1: float
    breakdown_step: int | None = None
    alphas: np.ndarray = field(default_factory=lambda: np.empty(0))
    betas: np.ndarray = field(default_factory=lambda: np.empty(0))


def _orthogonalize(w: np.ndarray, blocks: list[np.ndarray], coeffs: np.ndarray | None = None):
    """One classical Gram-Schmidt pass of w against blocks, updating coeffs in place."""
    for i, v in enumerate(blocks):
        c = inner(v, w)
        w = w - c * v
        if coeffs is not None:
            coeffs[i] += c
    return w


def _reorthogonalize(w: np.ndarray, blocks: list[np.ndarray], pre: float, tiny: float):
    """Cleanup passes for a new candidate block.

    Runs one classical pass; when that eats most of the norm, runs a second.
    If the second pass collapses the norm again, the candidate lies in the
    span of the existing blocks up to roundoff and the process has broken
    down ("twice is enough" rule).  Returns (w, vanished).
    """
    w = _orthogonalize(w, blocks)
    nrm = fro_norm(w)
    if nrm <= tiny:
        return w, True
    if nrm >= REORTH_DROP * pre:
        return w, False
    w = _orthogonalize(w, blocks)
    nrm2 = fro_norm(w)
    return w, nrm2 <= tiny or nrm2 < REORTH_DROP * nrm


def arnoldi(op: LinearTensorOperator, seed: np.ndarray, m: int,
            reorthogonalize: bool = True) -> ArnoldiDecomposition:
    """Run m steps of tensor Arnoldi with modified Gram-Schmidt.

    Produces orthonormal blocks V_1..V_{m+1} and the (m+1) x m upper
    Hessenberg matrix of orthogonalization coefficients.  A vanishing
    candidate norm stops the process early with ``breakdown_step`` set; the
    returned Hessenberg then carries a zero final row.
    """
    if not op.is_square:
        raise ValueError("Arnoldi needs a square operator")
    if m < 1:
        raise ValueError("m must be at least 1")
    beta = fro_norm(seed)
    if beta == 0.0:
        raise ValueError("seed tensor is zero")
    tiny = BREAKDOWN_REL * beta

    blocks = [seed / beta]
    h = np.zeros((m + 1, m))
    breakdown = None
    for j in range(m):
        w = op.apply(blocks[j])
        pre = fro_norm(w)
        for i in range(j + 1):
            h[i, j] = inner(blocks[i], w)
            w = w - h[i, j] * blocks[i]
        vanished = fro_norm(w) <= tiny
        if not vanished and reorthogonalize and fro_norm(w) < REORTH_DROP * pre:
            before = fro_norm(w)
            w = _orthogonalize(w, blocks[: j + 1], h[: j + 1, j])
            after = fro_norm(w)
            vanished = after <= tiny or after < REORTH_DROP * before
        if vanished:
            h[j + 1, j] = 0.0
            breakdown = j + 1
            h = h[: j + 2, : j + 1]
            break
        h[j + 1, j] = fro_norm(w)
        blocks.append(w / h[j + 1, j])
    return ArnoldiDecomposition(
        basis=np.stack(blocks), hessenberg=h, beta=beta, breakdown_step=breakdown
    )


class _BidiagState:
    """Incremental Golub-Kahan bidiagonalization shared by dc_gk and dc_lsqr."""

    def __init__(self, op: LinearTensorOperator, c: np.ndarray, reorthogonalize: bool = True):
        self.op = op
        self.reorth = reorthogonalize
        self.beta1 = fro_norm(c)
        if self.beta1 == 0.0:
            raise ValueError("right-hand side tensor is zero")
        self.tiny = BREAKDOWN_REL * self.beta1
        self.u_blocks = [c / self.beta1]
        self.alphas: list[float] = []
        self.betas: list[float] = []
        self.breakdown: int | None = None

        w = op.apply_adjoint(self.u_blocks[0])
        alpha1 = fro_norm(w)
        if alpha1 <= self.tiny:
            self.v_blocks: list[np.ndarray] = []
            self.breakdown = 0
        else:
            self.v_blocks = [w / alpha1]
            self.alphas.append(alpha1)

    def step(self) -> bool:
        """Extend the decomposition by one (beta, alpha) pair.

        Returns False once the recurrence breaks down; the bidiagonal matrix
        built so far stays valid.
        """
        if self.breakdown is not None:
            return False
        j = len(self.betas)  # completed steps
        av = self.op.apply(self.v_blocks[j])
        u_new = av - self.alphas[j] * self.u_blocks[j]
        if self.reorth:
            # the two-term recurrence alone loses orthogonality as soon as a
            # singular triple converges, far before any norm drop shows up,
            # so the cleanup pass is unconditional; its corrections are tiny
            # whenever the process has not broken down
            u_new, vanished = _reorthogonalize(u_new, self.u_blocks, fro_norm(av), self.tiny)
        else:
            vanished = fro_norm(u_new) <= self.tiny
        if vanished:
            self.betas.append(0.0)
            self.breakdown = j + 1
            return False
        beta = fro_norm(u_new)
        self.betas.append(beta)
        self.u_blocks.append(u_new / beta)

        atu = self.op.apply_adjoint(self.u_blocks[j + 1])
        v_new = atu - beta * self.v_blocks[j]
        if self.reorth:
            v_new, vanished = _reorthogonalize(v_new, self.v_blocks, fro_norm(atu), self.tiny)
        else:
            vanished = fro_norm(v_new) <= self.tiny
        if vanished:
            self.breakdown = j + 1
            return False
        alpha = fro_norm(v_new)
        self.alphas.append(alpha)
        self.v_blocks.append(v_new / alpha)
        return True

    def bidiagonal(self) -> np.ndarray:
        """Assemble the (m+1) x m lower bidiagonal matrix from the recurrences."""
        m = len(self.betas)
        mat = np.zeros((m + 1, m))
        for i in range(m):
            mat[i, i] = self.alphas[i]
            mat[i + 1, i] = self.betas[i]
        return mat


def golub_kahan(op: LinearTensorOperator, c: np.ndarray, m: int,
                reorthogonalize: bool = True) -> BidiagDecomposition:
    """Run m Golub-Kahan steps on (op, c), allowing rectangular operators."""
    if m < 1:
        raise ValueError("m must be at least 1")
    state = _BidiagState(op, c, reorthogonalize)
    for _ in range(m):
        if not state.step():
            break
    bidiag = state.bidiagonal()
    return BidiagDecomposition(
        u_basis=np.stack(state.u_blocks),
        v_basis=np.stack(state.v_blocks) if state.v_blocks else np.empty((0,) + c.shape),
        bidiag=bidiag,
        beta1=state.beta1,
        breakdown_step=state.breakdown,
        alphas=np.array(state.alphas),
        betas=np.array(state.betas),
    )


def _pick_lambda(cfg: SolverConfig, matrix: np.ndarray, rhs_scale: float) -> float:
    if cfg.lambda_mode == "gcv":
        return minimize_gcv(gcv_curve_from_matrix(matrix, rhs_scale))
    return float(cfg.lambda_mode)


def dc_gmres(op: LinearTensorOperator, c: np.ndarray, x0: np.ndarray | None = None,
             cfg: SolverConfig | None = None) -> SolverReport:
    """Restarted tensor GMRES with a regularized projected solve per cycle.

    Each cycle recomputes the residual explicitly, runs Arnoldi on it,
    selects lambda (GCV by default) for the projected Tikhonov problem and
    updates the iterate from the combined basis.  The explicit residual is
    required because the regularized projected solution does not minimize
    the unregularized projected residual, so no norm recurrence applies.
    """
    cfg = cfg or SolverConfig()
    if not op.is_square:
        raise ValueError("dc_gmres needs a square operator")
    x = np.zeros(op.domain_dims) if x0 is None else np.array(x0, dtype=float)
    c_norm = fro_norm(c)
    if c_norm == 0.0:
        raise ValueError("right-hand side tensor is zero")

    residuals: list[float] = []
    lambdas: list[float] = []
    norms: list[float] = []
    reason = "max_iter"
    cycles = 0

    residual = c - op.apply(x)
    res_norm = fro_norm(residual)
    residuals.append(res_norm)
    for _ in range(cfg.max_outer_iterations):
        if res_norm / c_norm < cfg.tolerance:
            reason = "tolerance"
            break
        dec = arnoldi(op, residual, cfg.restart_m, cfg.reorthogonalize)
        lam = _pick_lambda(cfg, dec.hessenberg, dec.beta)
        y = tikhonov_solve(dec.hessenberg, dec.beta, lam)
        x = x + basis_combine(dec.basis[: y.size], y)
        if not np.all(np.isfinite(x)):
            raise RuntimeError("iterate contains non-finite values")
        cycles += 1
        residual = c - op.apply(x)
        res_norm = fro_norm(residual)
        residuals.append(res_norm)
        lambdas.append(lam)
        norms.append(fro_norm(x))
        if dec.breakdown_step is not None:
            # the Krylov space is exhausted; restarting would rebuild it
            reason = "tolerance" if res_norm / c_norm < cfg.tolerance else "breakdown"
            break
    else:
        if res_norm / c_norm < cfg.tolerance:
            reason = "tolerance"
    return SolverReport(
        solution=x,
        residual_history=residuals,
        lambda_history=lambdas,
        solution_norm_history=norms,
        iterations_used=cycles,
        termination_reason=reason,
    )


def dc_gk(op: LinearTensorOperator, c: np.ndarray,
          cfg: SolverConfig | None = None) -> SolverReport:
    """Golub-Kahan bidiagonalization with one projected Tikhonov solve.

    Runs the bidiagonalization to ``max_inner_steps`` (default 20), picks
    lambda on the projected bidiagonal, solves the small regularized least
    squares problem and combines the solution from the V basis.
    """
    cfg = cfg or SolverConfig()
    m = cfg.max_inner_steps or 20
    dec = golub_kahan(op, c, m, cfg.reorthogonalize)
    m_eff = dec.bidiag.shape[1]
    if m_eff == 0:
        x = np.zeros(op.domain_dims)
        return SolverReport(
            solution=x,
            residual_history=[fro_norm(c)],
            lambda_history=[],
            solution_norm_history=[0.0],
            iterations_used=0,
            termination_reason="breakdown",
        )
    lam = _pick_lambda(cfg, dec.bidiag, dec.beta1)
    y = tikhonov_solve(dec.bidiag, dec.beta1, lam)
    x = basis_combine(dec.v_basis[:m_eff], y)
    res = fro_norm(c - op.apply(x))
    return SolverReport(
        solution=x,
        residual_history=[res],
        lambda_history=[lam],
        solution_norm_history=[fro_norm(x)],
        iterations_used=m_eff,
        termination_reason="breakdown" if dec.breakdown_step is not None else "max_iter",
    )


def dc_lsqr(op: LinearTensorOperator, c: np.ndarray,
            cfg: SolverConfig | None = None,
            callback=None) -> SolverReport:
    """Tensor LSQR: bidiagonalization with plane rotations applied on the fly.

    Per step, the rotation scalars update the iterate through the direction
    recurrence and |phibar| tracks the residual norm exactly (in exact
    arithmetic).  Stopping: residual tolerance, the step cap, breakdown, or
    the corner of the (residual, solution norm) curve when ``k_opt_mode`` is
    ``"lcurve"``.  A fixed integer ``k_opt_mode`` runs exactly that many
    steps.  With the corner rule the returned solution is rebuilt at the
    selected step from the stored basis.

    ``callback(k, x_k)``, if given, is invoked after every step; useful for
    tracking the true error when the ground truth is known.
    """
    cfg = cfg or SolverConfig()
    cap = cfg.max_inner_steps or 50
    if isinstance(cfg.k_opt_mode, int):
        cap = min(cap, cfg.k_opt_mode)
    state = _BidiagState(op, c, cfg.reorthogonalize)
    x = np.zeros(op.domain_dims)
    if state.breakdown is not None:  # adjoint of rhs vanished
        return SolverReport(
            solution=x,
            residual_history=[state.beta1],
            lambda_history=[],
            solution_norm_history=[0.0],
            iterations_used=0,
            termination_reason="breakdown",
        )

    rhobar = state.alphas[0]
    phibar = state.beta1
    w = state.v_blocks[0]
    residuals: list[float] = []
    norms: list[float] = []
    rhos: list[float] = []
    thetas: list[float] = []
    phis: list[float] = []
    reason = "max_iter"
    steps = 0
    for j in range(cap):
        stepped = state.step()
        beta_next = state.betas[j] if j < len(state.betas) else 0.0
        rho = np.hypot(rhobar, beta_next)
        if rho == 0.0:
            reason = "breakdown"
            break
        c_rot = rhobar / rho
        s_rot = beta_next / rho
        phi = c_rot * phibar
        phibar = -s_rot * phibar
        x = x + (phi / rho) * w
        steps = j + 1
        rhos.append(rho)
        phis.append(phi)
        residuals.append(abs(phibar))
        norms.append(fro_norm(x))
        if callback is not None:
            callback(steps, x)
        if abs(phibar) < cfg.tolerance * state.beta1:
            reason = "tolerance"
            break
        if not stepped:
            reason = "breakdown"
            break
        alpha_next = state.alphas[j + 1]
        theta = s_rot * alpha_next
        rhobar = c_rot * alpha_next
        thetas.append(theta)
        w = state.v_blocks[j + 1] - (theta / rho) * w

    k_opt = None
    if cfg.k_opt_mode == "lcurve" and steps >= 3:
        # residuals are nonincreasing, so zeros can only form a tail; truncate
        # there to keep the point index aligned with the step number
        usable = len(residuals)
        for i, (r, n) in enumerate(zip(residuals, norms)):
            if r <= 0.0 or n <= 0.0:
                usable = i
                break
        if usable >= 3:
            pts = list(zip(residuals[:usable], norms[:usable]))
            k_opt = lcurve_corner(pts) + 1
            x = _rebuild_lsqr_iterate(state, rhos, thetas, phis, k_opt, op.domain_dims)
            reason = "lcurve_corner"
    return SolverReport(
        solution=x,
        residual_history=residuals,
        lambda_history=[],
        solution_norm_history=norms,
        iterations_used=steps,
        termination_reason=reason,
        k_opt=k_opt,
    )


def _rebuild_lsqr_iterate(state: _BidiagState, rhos, thetas, phis, k: int, dims) -> np.ndarray:
    """Replay the direction recurrence up to step k from the stored V basis."""
    x = np.zeros(dims)
    w = state.v_blocks[0]
    for j in range(k):
        x = x + (phis[j] / rhos[j]) * w
        if j + 1 < k:
            w = state.v_blocks[j + 1] - (thetas[j] / rhos[j]) * w
    return x
