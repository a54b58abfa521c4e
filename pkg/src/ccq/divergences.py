"""Divergences and entropies restricted to a finite computational cone.

Every quantity is an optimization over the generators of a :class:`ChoiSet`
(or a POVM / preparable-state list) and reports the index of the optimizing
generator. Logarithms are base 2.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .channels import ChoiOperator, ChoiSet, flagged_choi
from .config import TOL
from .densemath import DensityOperator, ValidationError, herm_eigvals
from .rng import SeededRng


class InvariantViolation(RuntimeError):
    """Two routes to the same quantity disagreed beyond tolerance."""


class DegeneratePair(ValueError):
    pass


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    witness: tuple = ()
    infeasible: bool = False


@dataclass(frozen=True)
class EntropyReport:
    computational: float
    informational: float = None
    witness: tuple = ()
    gap: float = field(init=False, default=None)

    def __post_init__(self):
        if self.informational is not None:
            object.__setattr__(self, "gap", self.computational - self.informational)
            if self.gap < -TOL.gap_slack:
                raise InvariantViolation(
                    f"computational {self.computational} below informational {self.informational}"
                )


def _mat(x):
    return x.mat if isinstance(x, DensityOperator) else np.asarray(x, dtype=np.complex128)


def _first_argmax(v):
    return int(np.argmax(v))


def cone_order_leq(rho, sigma, scale, cs, tol=TOL):
    """Whether Tr[J rho] <= scale * Tr[J sigma] + tol for every generator."""
    a = cs.expectations(_mat(rho))
    b = cs.expectations(_mat(sigma))
    return bool(np.all(a <= scale * b + tol.cone))


def dmax_from_expectations(a, b, tol=TOL):
    inf_mask = (b <= tol.denom_zero) & (a > tol.numer_zero)
    if inf_mask.any():
        return DivergenceValue(np.inf, (int(np.argmax(inf_mask)),))
    ok = b > tol.denom_zero
    if not ok.any():
        raise DegeneratePair("degenerate pair: every generator vanishes on both states")
    ratio = np.where(ok, a / np.where(ok, b, 1.0), -np.inf)
    i = _first_argmax(ratio)
    if ratio[i] <= 0:
        return DivergenceValue(-np.inf, (i,))
    return DivergenceValue(float(np.log2(ratio[i])), (i,))


def comp_dmax(rho, sigma, cs, tol=TOL):
    """Computational max-divergence log max_J Tr[rho J] / Tr[sigma J]."""
    return dmax_from_expectations(cs.expectations(_mat(rho)), cs.expectations(_mat(sigma)), tol)


def _dh_lp(a, b, eta):
    # Charnes-Cooper form: min b.y  s.t.  a.y = 1, sum(y) <= 1/eta, y >= 0.
    res = linprog(b, A_ub=np.ones((1, len(a))), b_ub=[1.0 / eta], A_eq=a[None, :], b_eq=[1.0],
                  bounds=(0, None), method="highs")
    if res.status == 2:
        return np.inf, ()
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    support = tuple(int(i) for i in np.flatnonzero(res.x > 1e-12))
    return float(res.fun), support


def comp_dh(rho, sigma, cs, eta, tol=TOL, method="auto"):
    """Computational hypothesis-testing divergence at level ``eta``.

    Minimizes Tr[E sigma] / Tr[E rho] over the convex hull of the normalized
    effects E = J / d_A with Tr[E rho] >= eta, and returns minus its log.
    """
    if not 0 < eta <= 1:
        raise ValueError("eta must be in (0, 1]")
    a = cs.expectations(_mat(rho)) / cs.d_A
    b = cs.expectations(_mat(sigma)) / cs.d_A
    if a.max() < eta:
        return DivergenceValue(np.inf, (), infeasible=True)
    if method == "lp" or (method == "auto" and len(a) > tol.pair_enum_cap):
        ratio, wit = _dh_lp(a, b, eta)
    else:
        ratio, i, j = kernels.dh_pair_search(a, b, eta)
        wit = (i,) if j < 0 else (i, j)
    if ratio <= 0:
        return DivergenceValue(np.inf, wit)
    return DivergenceValue(float(-np.log2(ratio)), wit)


def random_sigma(d, rng, sample=0):
    z = rng.complex_normals(sample, d * d, stream=11).reshape(d, d)
    m = z @ z.conj().T
    return m / np.trace(m).real


def comp_hmin(rho, cs, rng=None, informational=None, tol=TOL):
    """Computational conditional min-entropy -log max_J Tr[rho J].

    The value is cross-checked against -comp_dmax(rho || 1_A (x) sigma_B) for a
    random full-rank sigma_B; a disagreement raises :class:`InvariantViolation`.
    """
    m = _mat(rho)
    a = cs.expectations(m)
    i = _first_argmax(a)
    value = -np.log2(a[i]) if a[i] > 0 else np.inf
    rng = rng or SeededRng(0)
    sigma = random_sigma(cs.d_B, rng)
    b = cs.marginal_expectations(sigma)
    check = dmax_from_expectations(a, b, tol)
    if abs(-check.value - value) > tol.route_agreement * max(1.0, abs(value)):
        raise InvariantViolation(f"min-entropy routes disagree: {value} vs {-check.value}")
    return EntropyReport(float(value) + 0.0, informational, (i,))


def comp_hmin_pure(psi, cs, informational=None):
    """comp_hmin for a pure state given as a ket; avoids forming |psi><psi|."""
    a = cs.expectations_pure(psi)
    i = _first_argmax(a)
    value = -np.log2(a[i]) if a[i] > 0 else np.inf
    return EntropyReport(float(value) + 0.0, informational, (i,))


def _povm_array(p):
    return np.asarray(p, dtype=np.complex128)


def guess_table(probs, states, povm):
    """Matrix P[i, x] = p_x Tr[E_i rho_x] for one POVM."""
    mats = np.array([_mat(s) for s in states])
    e = _povm_array(povm)
    return np.real(np.einsum("ibc,xcb->ix", e, mats)) * np.asarray(probs)[None, :]


def comp_guess(probs, states, povms, check=True, tol=TOL):
    """Restricted guessing probability with free relabeling of outcomes.

    For each POVM the best relabeling sends outcome i to argmax_x p_x Tr[E_i rho_x].
    When ``check`` is set the value is recomputed as 2^{-H} of the restricted
    min-entropy of the classical-quantum embedding, using flagged generators
    built from the optimally relabeled POVMs.

    Returns ``(value, povm_index, relabeling)``.
    """
    probs = np.asarray(probs, dtype=float)
    if abs(probs.sum() - 1) > 1e-9 or np.any(probs < 0):
        raise ValidationError("probabilities must be a distribution")
    best, bi, blab = -1.0, -1, None
    for k, p in enumerate(povms):
        table = guess_table(probs, states, p)
        val = float(table.max(axis=1).sum())
        if val > best:
            best, bi, blab = val, k, tuple(int(x) for x in table.argmax(axis=1))
    if check:
        nx = len(states)
        d_B = _mat(states[0]).shape[0]
        gens = []
        for p in povms:
            table = guess_table(probs, states, p)
            lab = table.argmax(axis=1)
            coarse = np.zeros((nx, d_B, d_B), dtype=np.complex128)
            for i, x in enumerate(lab):
                coarse[x] += _povm_array(p)[i]
            gens.append(flagged_choi(coarse))
        cs = ChoiSet(gens, nx, d_B, "flagged")
        h = comp_hmin(cq_state(probs, states), cs).computational
        if abs(2.0 ** (-h) - best) > tol.route_agreement:
            raise InvariantViolation(f"guessing routes disagree: {best} vs {2.0 ** -h}")
    return best, bi, blab


def cq_state(probs, states):
    """sum_x p_x |x><x| (x) rho_x."""
    nx = len(states)
    d = _mat(states[0]).shape[0]
    m = np.zeros((nx * d, nx * d), dtype=np.complex128)
    for x, (p, s) in enumerate(zip(probs, states)):
        m[x * d:(x + 1) * d, x * d:(x + 1) * d] = p * _mat(s)
    return m


def binary_coarse_grainings(povms):
    """ChoiSet of |0><0| (x) E_i + |1><1| (x) (1 - E_i) for every POVM outcome."""
    gens = []
    for k, p in enumerate(povms):
        p = _povm_array(p)
        eye = np.eye(p.shape[1])
        for i, e in enumerate(p):
            gens.append(flagged_choi(np.array([e, eye - e]), f"povm{k}:{i}"))
    return ChoiSet(gens, 2, p.shape[1], "flagged")


def measured_dmax(rho, sigma, povms, check=True, tol=TOL):
    """log max over POVMs and outcomes of Tr[E rho] / Tr[E sigma].

    With ``check`` the value is compared with comp_dmax of |0><0| (x) rho versus
    |0><0| (x) sigma over the pinched cone of binary coarse-grainings.
    """
    r, s = _mat(rho), _mat(sigma)
    a = np.concatenate([np.real(np.einsum("ibc,cb->i", _povm_array(p), r)) for p in povms])
    b = np.concatenate([np.real(np.einsum("ibc,cb->i", _povm_array(p), s)) for p in povms])
    res = dmax_from_expectations(a, b, tol)
    if check:
        cs = binary_coarse_grainings(povms)
        d = r.shape[0]
        flag = np.zeros((2, 2))
        flag[0, 0] = 1.0
        other = comp_dmax(np.kron(flag, r), np.kron(flag, s), cs, tol)
        same = (np.isinf(other.value) and np.isinf(res.value)) or abs(other.value - res.value) <= tol.route_agreement
        if not same:
            raise InvariantViolation(f"measured divergence routes disagree: {res.value} vs {other.value}")
    return res


def comp_op_norm(x, prep):
    """max over preparable tau of |Tr[x tau^T]|. Returns ``(value, index)``."""
    x = np.asarray(x, dtype=np.complex128)
    vals = np.array([abs(np.trace(x @ _mat(t).T)) for t in prep.states])
    i = _first_argmax(vals)
    return float(vals[i]), i


def comp_hmin_noncond(rho, prep):
    """-log comp_op_norm(rho), next to the unrestricted -log lambda_max."""
    val, i = comp_op_norm(_mat(rho), prep)
    info = -np.log2(herm_eigvals(_mat(rho))[0])
    return EntropyReport(float(-np.log2(val)), float(info), (i,))
