"""Schur-Weyl duality on k qubits and the entanglement-concentration channel.

Two-row Young diagrams ``(k - j', j')`` label the blocks of (C^2)^{(x) k}.
The block with spin ``j = k/2 - j'`` has a unitary factor of dimension
``2j + 1`` (index ``u``) and a permutation factor of dimension ``dim_v``
(index ``v``). Schur basis vectors are ``|lam, u, v>``; the multiplicity
label ``v`` enumerates highest-weight vectors and ``u`` counts applications of
the total lowering operator. The whole construction is real.
"""
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import comb, factorial, log2, prod

import numpy as np

from .config import TOL
from .densemath import DensityOperator, Ket, ValidationError, dagger, permute_subsystems


@dataclass(frozen=True, order=True)
class YoungDiagram:
    """Partition with non-increasing parts, trailing zeros dropped."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts if p)
        if any(a < b for a, b in zip(parts, parts[1:])) or any(p < 0 for p in parts):
            raise ValidationError(f"{self.parts} is not a partition")
        object.__setattr__(self, "parts", parts)

    @property
    def k(self):
        return sum(self.parts)

    @property
    def rows(self):
        return len(self.parts)

    def padded(self, d):
        if self.rows > d:
            raise ValidationError(f"{self.parts} has more than {d} rows")
        return self.parts + (0,) * (d - self.rows)

    @property
    def spin2(self):
        """2j for a two-row diagram."""
        p = self.padded(2)
        return p[0] - p[1]

    def __str__(self):
        return "(" + ",".join(map(str, self.padded(max(2, self.rows)))) + ")"


def diagrams(k):
    """Two-row diagrams of size ``k`` ordered by descending first row."""
    if not 1 <= k <= TOL.max_schur_k:
        raise ValidationError(f"k must be in 1..{TOL.max_schur_k}")
    return [YoungDiagram((k - j, j)) for j in range(k // 2 + 1)]


def dim_unitary_irrep(lam, d=2):
    """Dimension of the U(d) irrep: prod_{i<j} (l_i - l_j + j - i) / (j - i)."""
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(tuple(lam))
    p = lam.padded(d)
    num = prod(p[i] - p[j] + j - i for i in range(d) for j in range(i + 1, d))
    den = prod(j - i for i in range(d) for j in range(i + 1, d))
    return num // den


def dim_symmetric_irrep(lam, d=None):
    """Dimension of the S_k irrep: k! prod_{i<j}(l_i - l_j + j - i) / prod_i (l_i + d - i)!."""
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(tuple(lam))
    d = max(lam.rows, 1) if d is None else d
    p = lam.padded(d)
    num = factorial(lam.k) * prod(p[i] - p[j] + j - i for i in range(d) for j in range(i + 1, d))
    den = prod(factorial(p[i] + d - 1 - i) for i in range(d))
    if num % den:
        raise ArithmeticError("non-integral irrep dimension")
    return num // den


def spin_operators(k):
    """Total S_z (diagonal) and raising S_+ on k qubits, |0> = spin up."""
    n = 2**k
    idx = np.arange(n)
    ones = np.array([bin(i).count("1") for i in idx])
    sz = np.diag((k - 2 * ones) / 2.0)
    sp = np.zeros((n, n))
    for q in range(k):
        bit = 1 << (k - 1 - q)
        src = idx[(idx & bit) != 0]
        sp[src ^ bit, src] = 1.0
    return sz, sp


def casimir(k):
    sz, sp = spin_operators(k)
    return sp.T @ sp + sz @ sz + sz


@dataclass(frozen=True)
class SchurBlock:
    lam: YoungDiagram
    dim_u: int
    dim_v: int
    basis: np.ndarray  # shape (2**k, dim_u, dim_v), columns |lam, u, v>
    offset: int

    @property
    def rank(self):
        return self.dim_u * self.dim_v

    def columns(self):
        return self.basis.reshape(self.basis.shape[0], -1)


@dataclass(frozen=True, eq=False)
class SchurTable:
    k: int
    blocks: tuple

    @cached_property
    def projectors(self):
        """Block projectors Pi_lam from spectral projection of the Casimir."""
        return casimir_projectors(self.k, [b.lam for b in self.blocks])

    def unitary(self):
        """Orthogonal matrix whose columns are the Schur basis (lam, u, v order)."""
        return np.concatenate([b.columns() for b in self.blocks], axis=1)


def casimir_projectors(k, lams):
    """Pi_lam = prod_{j' != j} (C - j'(j'+1)) / (j(j+1) - j'(j'+1))."""
    c = casimir(k)
    n = c.shape[0]
    spins = [lam.spin2 / 2.0 for lam in lams]
    out = []
    for j in spins:
        p = np.eye(n)
        for jj in spins:
            if jj != j:
                p = p @ (c - jj * (jj + 1) * np.eye(n)) / (j * (j + 1) - jj * (jj + 1))
        out.append(p)
    return out


def _highest_weight_vectors(k, n_down, sp):
    """Orthonormal kernel of S_+ in the weight space with ``n_down`` ones.

    Built by Gram-Schmidt over computational basis states in index order,
    after projecting out the range of S_- from the weight space above.
    """
    n = 2**k
    idx = np.arange(n)
    ones = np.array([bin(i).count("1") for i in idx])
    space = idx[ones == n_down]
    above = idx[ones == n_down - 1]
    if len(above):
        lower = sp.T[np.ix_(space, above)]
        q, rr = np.linalg.qr(lower)
        q = q[:, np.abs(np.diag(rr)) > 1e-10]
        proj = np.eye(len(space)) - q @ q.T
    else:
        proj = np.eye(len(space))
    vecs = []
    for col in range(len(space)):
        v = proj[:, col].copy()
        for u in vecs:
            v -= (u @ v) * u
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            vecs.append(v / nv)
    full = np.zeros((n, len(vecs)))
    for i, v in enumerate(vecs):
        full[space, i] = v
    return full


@lru_cache(maxsize=None)
def schur_blocks(k):
    """Schur basis for (C^2)^{(x) k}, one block per two-row diagram."""
    _, sp = spin_operators(k)
    sm = sp.T
    blocks, offset = [], 0
    for lam in diagrams(k):
        du, dv = dim_unitary_irrep(lam), dim_symmetric_irrep(lam, 2)
        hw = _highest_weight_vectors(k, lam.padded(2)[1], sp)
        if hw.shape[1] != dv:
            raise ArithmeticError(f"found {hw.shape[1]} highest-weight vectors for {lam}, expected {dv}")
        basis = np.zeros((2**k, du, dv))
        cur = hw
        for u in range(du):
            cur = cur / np.linalg.norm(cur, axis=0)
            basis[:, u, :] = cur
            cur = sm @ cur
        blocks.append(SchurBlock(lam, du, dv, basis, offset))
        offset += dv
    return SchurTable(k, tuple(blocks))


def _mat(x):
    return x.mat if isinstance(x, DensityOperator) else np.asarray(x, dtype=np.complex128)


def tensor_power(m, k):
    out = np.ones((1, 1), dtype=np.complex128)
    for _ in range(k):
        out = np.kron(out, m)
    return out


def pr_lambda(rho, k):
    """Weights Tr[Pi_lam rho^{(x) k}], in the order of :func:`diagrams`."""
    table = schur_blocks(k)
    rk = tensor_power(_mat(rho), k)
    return np.array([float(np.real(np.sum(b.columns() * (rk @ b.columns())))) for b in table.blocks])


def _copies_to_parties(vec, d_A, d_B, k):
    """Coefficient matrix [A^k, B^k] of psi^{(x) k} for a single-copy ket ``vec``."""
    vec = tensor_power(np.asarray(vec).reshape(1, -1), k).reshape(-1)
    dims = (d_A, d_B) * k
    order = tuple(range(0, 2 * k, 2)) + tuple(range(1, 2 * k, 2))
    return permute_subsystems(vec, dims, order).reshape(d_A**k, d_B**k)


def schmidt_ket(p):
    """sqrt(p)|00> + sqrt(1-p)|11>."""
    v = np.zeros(4, dtype=np.complex128)
    v[0], v[3] = np.sqrt(p), np.sqrt(1.0 - p)
    return Ket(v, (2, 2))


@dataclass(frozen=True)
class DecompositionCheck:
    probabilities: np.ndarray
    residual: float
    cross_block: float


def decomposition_check(psi, k):
    """Verify psi^{(x) k} = sum_lam sqrt(Pr(lam)) |Phi^lam>_{UU} (x) |phi^+>_{VV}.

    The two-qubit ket ``psi`` is expanded in the Schur basis on both sides;
    per block the unitary-part state is read off from the v-diagonal, and the
    state is rebuilt with the independently computed weights Pr(lam).
    """
    v = psi.vec if isinstance(psi, Ket) else np.asarray(psi, dtype=np.complex128)
    table = schur_blocks(k)
    c = _copies_to_parties(v, 2, 2, k)
    rho_a = c[:, :] @ dagger(c)
    probs = np.array([float(np.real(np.sum(b.columns() * (rho_a @ b.columns())))) for b in table.blocks])
    rebuilt = np.zeros_like(c)
    cross = 0.0
    for bi, b in enumerate(table.blocks):
        for bj, b2 in enumerate(table.blocks):
            if bi != bj:
                cross = max(cross, float(np.abs(b.columns().T @ c @ b2.columns()).max(initial=0.0)))
        m = np.einsum("xuv,xy,ywz->uvwz", b.basis, c, b.basis)
        phi = np.einsum("uvwv->uw", m) / b.dim_v
        nrm = np.linalg.norm(phi)
        if nrm == 0:
            continue
        phi = phi / nrm
        # sqrt(Pr) Phi[u,w] (1/sqrt(dim_v)) sum_v |u v>|w v>
        coef = np.sqrt(probs[bi] / b.dim_v) * phi
        rebuilt += np.einsum("xuv,uw,ywv->xy", b.basis, coef, b.basis)
    return DecompositionCheck(probs, float(np.linalg.norm(rebuilt - c)), cross)


@dataclass(frozen=True, eq=False)
class ConcentrationChannel:
    """Local Schur-concentration Kraus operators and the combined B-side map.

    ``local[(lam, u)]`` is A_{lam,u} = W_lam (<u| (x) 1) Pi_lam, where W_lam
    sends the v-th multiplicity vector to the computational state
    |offset_lam + v>. ``kraus`` holds C = A_{lam,u}^T A_{mu,u'} for every pair.
    """

    k: int
    local: dict
    kraus: list

    @property
    def tp_residual(self):
        s = sum(dagger(c) @ c for c in self.kraus)
        return float(np.linalg.norm(s - np.eye(2**self.k)))

    @property
    def local_tp_residual(self):
        s = sum(dagger(a) @ a for a in self.local.values())
        return float(np.linalg.norm(s - np.eye(2**self.k)))

    def normalized_kraus(self):
        """Kraus operators C Pi_mu / sqrt(dim_u(mu)); these sum to the identity."""
        table = schur_blocks(self.k)
        out = []
        for (lam, u), a in self.local.items():
            for b in table.blocks:
                pm = b.columns() @ b.columns().T
                for u2 in range(b.dim_u):
                    out.append(a.T @ self.local[(b.lam, u2)] @ pm / np.sqrt(b.dim_u))
        return out


def build_concentration_channel(k):
    table = schur_blocks(k)
    n = 2**k
    local = {}
    for b in table.blocks:
        for u in range(b.dim_u):
            a = np.zeros((n, n))
            a[b.offset:b.offset + b.dim_v, :] = b.basis[:, u, :].T
            local[(b.lam, u)] = a
    mats = list(local.values())
    kraus = [a.T @ bb for a in mats for bb in mats]
    return ConcentrationChannel(k, local, kraus)


@dataclass(frozen=True)
class ConcentrationResult:
    overlap: float
    overlap_local: float
    formula: float
    blockform_residual: float
    tp_residual: float
    overlap_tp: float
    probabilities: np.ndarray


def concentrate_overlap(psi, k):
    """Overlap <Omega| (Id (x) T)(psi^{(x) k}) |Omega> for the concentration map.

    Computed three ways: through the combined B-side Kraus operators, through
    the local two-sided protocol, and from the closed form
    sum_lam Pr(lam) dim_v / 2^k. Also reports the overlap reached by the
    trace-preserving normalization of the B-side map.
    """
    v = psi.vec if isinstance(psi, Ket) else np.asarray(psi, dtype=np.complex128)
    n = 2**k
    chan = build_concentration_channel(k)
    table = schur_blocks(k)
    c = _copies_to_parties(v, 2, 2, k)
    omega = np.eye(n).reshape(-1) / np.sqrt(n)
    # B side only: <Omega|(1 (x) C)|psi> = tr(C c^T) / sqrt(n) with c as [A, B]
    ov_b = sum(abs(np.sum(cc * c)) ** 2 for cc in chan.kraus) / n
    ov_tp = sum(abs(np.sum(cc * c)) ** 2 for cc in chan.normalized_kraus()) / n
    # two-sided local protocol
    mats = list(chan.local.values())
    out = np.zeros((n * n, n * n), dtype=np.complex128)
    ov_l = 0.0
    for a in mats:
        for b in mats:
            phi = (a @ c @ b.T).reshape(-1)
            ov_l += abs(np.vdot(omega, phi)) ** 2
            out += np.outer(phi, phi.conj())
    probs = np.array([float(np.real(np.sum(b.columns() * ((c @ dagger(c)) @ b.columns())))) for b in table.blocks])
    formula = float(sum(p * b.dim_v for p, b in zip(probs, table.blocks)) / n)
    target = np.zeros_like(out)
    for p, b in zip(probs, table.blocks):
        e = np.zeros((n, n))
        for vv in range(b.dim_v):
            e[b.offset + vv, b.offset + vv] = 1.0
        phi = e.reshape(-1) / np.sqrt(b.dim_v)
        target += p * np.outer(phi, phi)
    return ConcentrationResult(
        float(ov_b), float(ov_l), formula, float(np.linalg.norm(out - target)),
        chan.tp_residual, float(ov_tp), probs,
    )


@dataclass(frozen=True)
class BoundReport:
    bound: float
    achieved: float
    achieved_tp: float
    hmin_single: float


def hmin_upper_bound(psi, k, hmin_single=None):
    """Compare -(k/4) min{H_min(A), log k} + log(3/2) with the achieved value.

    ``achieved`` is -log(2^k overlap) for the concentration map and
    ``achieved_tp`` the same for its trace-preserving normalization. The
    report is informational; no inequality is asserted.
    """
    from .refentropy import hmin_noncond_exact

    v = psi.vec if isinstance(psi, Ket) else np.asarray(psi)
    if hmin_single is None:
        c = v.reshape(2, 2)
        hmin_single = hmin_noncond_exact(c @ dagger(c))
    res = concentrate_overlap(psi, k)
    bound = -(k / 4.0) * min(hmin_single, log2(k) if k > 1 else 0.0) + log2(1.5)
    return BoundReport(
        float(bound), float(-log2(2**k * res.overlap)), float(-log2(2**k * res.overlap_tp)), float(hmin_single)
    )


def permutation_operator(perm, d):
    """Operator sending |x_1..x_k> to |x_{perm^{-1}(1)}..>, i.e. factor i moves to perm[i]."""
    k = len(perm)
    n = d**k
    idx = np.arange(n)
    digits = np.array([(idx // d ** (k - 1 - i)) % d for i in range(k)])
    new = np.zeros_like(digits)
    for i, p in enumerate(perm):
        new[p] = digits[i]
    target = sum(new[i] * d ** (k - 1 - i) for i in range(k))
    m = np.zeros((n, n))
    m[target, idx] = 1.0
    return m
