"""Unrestricted reference entropies: exact formulas and a barrier-method SDP."""
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .densemath import (
    DensityOperator,
    Ket,
    ValidationError,
    dagger,
    herm_eig,
    herm_eigvals,
    ptrace,
    trace_norm,
    tr_sqrt,
)


class SdpNotConverged(RuntimeError):
    pass


def _mat(x):
    return x.mat if isinstance(x, DensityOperator) else np.asarray(x, dtype=np.complex128)


def dmax_exact(rho, sigma, tol=TOL):
    """Max-relative entropy log2 min{lambda : rho <= lambda sigma}; +inf off-support."""
    r, s = _mat(rho), _mat(sigma)
    ws, vs = herm_eig(s, tol)
    wr, vr = herm_eig(r, tol)
    for lam, v in zip(wr, vr.T):
        if lam > tol.support_eig and np.real(np.vdot(v, s @ v)) < tol.support_overlap:
            return np.inf
    supp = ws > tol.support_eig
    inv_sqrt = (vs[:, supp] / np.sqrt(ws[supp])) @ dagger(vs[:, supp])
    lam = herm_eigvals(inv_sqrt @ r @ inv_sqrt, tol)[0]
    return float(np.log2(lam))


@dataclass(frozen=True)
class SdpSolution:
    primal: float
    dual: float
    sigma_B: np.ndarray
    F: np.ndarray
    gap: float
    iterations: int

    @property
    def hmin(self):
        return float(-np.log2(self.primal))


def _chol_inv(m):
    """Inverse of a Hermitian positive-definite matrix, or None if not PD."""
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    ci = np.linalg.inv(c)
    return dagger(ci) @ ci


def _logdet_pd(m):
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.real(np.diag(c)))))


def hmin_sdp(rho, dims=None, tol=TOL):
    """Conditional min-entropy H_min(A|B) via a log-barrier interior-point method.

    Solves  min Tr[s]  s.t.  1_A (x) s - rho >= 0  over Hermitian ``s`` on B,
    following the central path of
    ``t Tr[s] - logdet(1_A (x) s - rho) - logdet(s)`` with Newton steps and
    backtracking. The dual certificate ``F = S^{-1} / t`` is rescaled so that
    ``tr_A F <= 1_B`` holds exactly, which makes ``dual`` a rigorous lower bound.

    Parameters
    ----------
    rho : DensityOperator or ndarray
        Bipartite state on A (x) B.
    dims : tuple, optional
        ``(d_A, d_B)``; taken from ``rho.dims`` when it has two factors.
    """
    r = _mat(rho)
    if dims is None:
        if not isinstance(rho, DensityOperator) or len(rho.dims) != 2:
            raise ValidationError("hmin_sdp needs bipartite dims (d_A, d_B)")
        dims = rho.dims
    d_A, d_B = dims
    n = d_A * d_B
    if n > tol.max_sdp_dim:
        raise ValidationError(f"SDP dimension {n} exceeds cap {tol.max_sdp_dim}")
    r = (r + dagger(r)) / 2
    lmax = max(float(np.linalg.eigvalsh(r)[-1]), 1e-300)
    s = 2.0 * lmax * np.eye(d_B, dtype=np.complex128)
    eye_A = np.eye(d_A)
    m_bar = n + d_B
    t = tol.sdp_t0
    iters = 0

    def barrier(x):
        l1 = _logdet_pd(np.kron(eye_A, x) - r)
        l2 = _logdet_pd(x)
        if l1 is None or l2 is None:
            return None
        return t * np.trace(x).real - l1 - l2

    while True:
        # centering
        prev = np.inf
        while True:
            big = np.kron(eye_A, s) - r
            si = _chol_inv(big)
            xi = _chol_inv(s)
            w = si.reshape(d_A, d_B, d_A, d_B)
            grad = t * np.eye(d_B) - np.einsum("abac->bc", w) - xi
            # Hessian as a superoperator on vec(delta), row-major
            x = w.transpose(0, 2, 1, 3).reshape(d_A * d_A, d_B * d_B)
            y = w.transpose(2, 0, 1, 3).reshape(d_A * d_A, d_B * d_B)
            hess = (x.T @ y).reshape(d_B, d_B, d_B, d_B).transpose(0, 3, 1, 2)
            hess = hess.reshape(d_B * d_B, d_B * d_B)
            hess = hess + np.kron(xi, xi.T)
            step = np.linalg.solve(hess, -grad.reshape(-1)).reshape(d_B, d_B)
            step = (step + dagger(step)) / 2
            decrement = float(np.real(np.vdot(-grad, step)))
            iters += 1
            if iters > tol.sdp_max_iter:
                raise SdpNotConverged(f"no convergence after {tol.sdp_max_iter} Newton steps")
            if decrement / 2 <= 1e-10:
                break
            # Floating-point floor: the decrement has stopped shrinking.
            if decrement < 1e-6 and decrement > 0.25 * prev:
                break
            prev = decrement
            # Inside the quadratic-convergence region the full step is taken
            # whenever it stays strictly feasible; barrier values at large t
            # are too large to resolve the Armijo decrease in floating point.
            if decrement < 1e-6 and barrier(s + step) is not None:
                s = s + step
                s = (s + dagger(s)) / 2
                continue
            f0 = barrier(s)
            alpha = 1.0
            while True:
                cand = s + alpha * step
                f1 = barrier(cand)
                if f1 is not None and f1 <= f0 - 0.25 * alpha * decrement:
                    break
                alpha *= 0.5
                if alpha < 1e-14:
                    break
            if alpha < 1e-14:
                break
            s = (cand + dagger(cand)) / 2
        if m_bar / t < tol.sdp_stop:
            break
        t *= tol.sdp_mu

    # Dual certificate: F = S^{-1} / t, then a congruence by (tr_A F)^{-1/2}
    # so that tr_A F = 1_B holds exactly.
    big = np.kron(eye_A, s) - r
    f = _chol_inv(big) / t
    f = (f + dagger(f)) / 2
    marg = ptrace(f, (d_A, d_B), (1,))
    wm, vm = np.linalg.eigh((marg + dagger(marg)) / 2)
    c = np.kron(eye_A, (vm / np.sqrt(wm)) @ dagger(vm))
    f = c @ f @ c
    f = (f + dagger(f)) / 2
    primal = float(np.trace(s).real)
    dual = float(np.real(np.trace(r @ f)))
    return SdpSolution(primal, dual, s, f, primal - dual, iters)


def hmin_pure(psi, dims=None):
    """H_min(A|B) of a pure state: -2 log2 Tr sqrt(rho_A)."""
    if isinstance(psi, Ket):
        v, dims = psi.vec, psi.dims if dims is None else dims
    else:
        v = np.asarray(psi, dtype=np.complex128)
    if dims is None or len(dims) != 2:
        raise ValidationError("hmin_pure needs bipartite dims")
    d_A, d_B = dims
    c = v.reshape(d_A, d_B)
    s = np.linalg.svd(c, compute_uv=False)
    return float(-2.0 * np.log2(np.sum(s)))


def hmin_pure_via_reduced(psi, dims):
    """Same quantity via the reduced state, using the Jacobi eigen-solver."""
    v = psi.vec if isinstance(psi, Ket) else np.asarray(psi)
    rho_a = ptrace(np.outer(v, v.conj()), dims, (0,))
    return float(-2.0 * np.log2(tr_sqrt(rho_a)))


def hmin_noncond_exact(rho):
    """-log2 of the largest eigenvalue."""
    return float(-np.log2(herm_eigvals(_mat(rho))[0]))


def pguess_helstrom(p0, rho0, rho1):
    """Optimal two-state discrimination probability (1 + ||p0 rho0 - p1 rho1||_1) / 2."""
    return 0.5 * (1.0 + trace_norm(p0 * _mat(rho0) - (1.0 - p0) * _mat(rho1)))


def von_neumann(rho):
    w = herm_eigvals(_mat(rho)) if _mat(rho).shape[0] <= TOL.jacobi_max_dim else np.linalg.eigvalsh(_mat(rho))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def conditional_entropy(rho, dims):
    """H(A|B) = H(AB) - H(B)."""
    m = _mat(rho)
    return von_neumann(m) - von_neumann(ptrace(m, dims, (1,)))
