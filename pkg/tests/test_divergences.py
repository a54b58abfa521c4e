import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccq.channels import (
    ChoiOperator,
    ChoiSet,
    PreparableSet,
    flag_povm_set,
    generate_choi_set,
    identity_choi,
    pauli_mp_family,
    prepare_zero_spec,
    choi_of,
    tensor_choi_sets,
)
from ccq.circuits import EnumerationBudget, GateSet, gate_set
from ccq.densemath import (
    ValidationError,
    basis_ket,
    max_entangled,
    permute_subsystems,
    ptrace,
    random_density,
)
from ccq.divergences import (
    DegeneratePair,
    EntropyReport,
    InvariantViolation,
    comp_dh,
    comp_dmax,
    comp_guess,
    comp_hmin,
    comp_hmin_noncond,
    comp_hmin_pure,
    comp_op_norm,
    cone_order_leq,
    guess_table,
    measured_dmax,
    random_sigma,
)
from ccq.refentropy import dmax_exact, hmin_sdp
from ccq.rng import SeededRng

GS = gate_set("clifford_hsc")
OMEGA = np.outer(max_entangled(2).vec, max_entangled(2).vec.conj())
KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def omega_set():
    return ChoiSet([ChoiOperator.from_matrix(identity_choi(2), 2, 2, "-")], 2, 2, "clifford_hsc")


def rich_set():
    return generate_choi_set(GS, EnumerationBudget(2, 1, 1), 2, 2, reference_channels=True)


def prep_set():
    return PreparableSet([KET0, PLUS], ["-", "H(0)"])


def test_dmax_examples():
    cs = omega_set()
    r = comp_dmax(OMEGA, np.eye(4) / 4, cs)
    assert abs(r.value - 2) < 1e-12 and r.witness == (0,)
    assert comp_dmax(OMEGA, OMEGA, cs).value == 0.0


def test_dmax_infinite_and_degenerate():
    cs = ChoiSet([ChoiOperator.from_matrix(np.kron(KET0, np.eye(2)), 2, 2)], 2, 2, "x")
    rho = np.kron(KET0, np.eye(2) / 2)
    sigma = np.kron(KET1, np.eye(2) / 2)
    assert comp_dmax(rho, sigma, cs).value == np.inf
    with pytest.raises(DegeneratePair):
        comp_dmax(sigma, sigma, cs)


def test_cone_order():
    cs = rich_set()
    rng = np.random.default_rng(1)
    rho = random_density((2, 2), rng).mat
    sigma = random_density((2, 2), rng).mat
    assert cone_order_leq(rho, rho, 1.0, cs)
    assert not cone_order_leq(rho, rho, 0.5, cs)
    d = comp_dmax(rho, sigma, cs).value
    assert cone_order_leq(rho, sigma, 2 ** (d + 1e-9), cs)
    assert not cone_order_leq(rho, sigma, 2 ** (d - 1e-6), cs)


def test_sigma_independence():
    cs = rich_set()
    rng = np.random.default_rng(2)
    rho = random_density((2, 2), rng).mat
    vals = []
    for k in range(10):
        s = random_sigma(2, SeededRng(k))
        vals.append(comp_dmax(rho, np.kron(np.eye(2), s), cs).value)
    assert np.ptp(vals) < 1e-10


def test_hmin_examples():
    assert abs(comp_hmin(OMEGA, omega_set()).computational + 1) < 1e-12
    rho = np.kron(KET0, np.eye(2) / 2)
    assert abs(comp_hmin(rho, omega_set()).computational - 1) < 1e-12
    gens = list(omega_set()) + [choi_of(prepare_zero_spec(GS, 1, 1))]
    cs = ChoiSet(gens, 2, 2, "clifford_hsc")
    assert abs(comp_hmin(rho, cs).computational) < 1e-12


def test_hmin_monotone_in_set():
    rng = np.random.default_rng(3)
    small = generate_choi_set(GS, EnumerationBudget(1, 1), 2, 2)
    big = rich_set()
    for _ in range(5):
        rho = random_density((2, 2), rng).mat
        assert comp_hmin(rho, big).computational <= comp_hmin(rho, small).computational + 1e-12


def test_hmin_pure_matches_mixed():
    rng = np.random.default_rng(4)
    cs = rich_set()
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    a = comp_hmin_pure(v, cs).computational
    b = comp_hmin(np.outer(v, v.conj()), cs).computational
    assert abs(a - b) < 1e-10


def test_restricted_above_unrestricted():
    rng = np.random.default_rng(5)
    cs = pauli_mp_family(1)
    cs2 = rich_set()
    for _ in range(5):
        rho = random_density((2, 2), rng)
        h = hmin_sdp(rho).hmin
        assert comp_hmin(rho, cs, informational=h).gap >= -1e-7
        assert comp_hmin(rho, cs2, informational=h).gap >= -1e-7


def test_entropy_report_rejects_negative_gap():
    with pytest.raises(InvariantViolation):
        EntropyReport(0.0, 0.5)
    assert EntropyReport(1.0, 0.25).gap == 0.75


def test_witness_reproduces_optimum():
    rng = np.random.default_rng(6)
    cs = rich_set()
    rho = random_density((2, 2), rng).mat
    sigma = random_density((2, 2), rng).mat
    r = comp_dmax(rho, sigma, cs)
    g = cs[r.witness[0]]
    assert abs(np.log2(g.expectation(rho) / g.expectation(sigma)) - r.value) < 1e-12
    h = comp_hmin(rho, cs)
    assert abs(-np.log2(cs[h.witness[0]].expectation(rho)) - h.computational) < 1e-12


def test_sub_additivity():
    rng = np.random.default_rng(7)
    cs = generate_choi_set(GS, EnumerationBudget(1, 1, 1), 2, 2)
    prod = tensor_choi_sets(cs, cs)
    r1 = random_density((2, 2), rng).mat
    r2 = random_density((2, 2), rng).mat
    joint = permute_subsystems(np.kron(r1, r2), (2, 2, 2, 2), (0, 2, 1, 3))
    h = comp_hmin(joint, prod).computational
    assert h <= comp_hmin(r1, cs).computational + comp_hmin(r2, cs).computational + 1e-9


def test_dmax_super_additivity():
    rng = np.random.default_rng(8)
    cs = rich_set()
    extra = generate_choi_set(GS, EnumerationBudget(2, 2), 4, 4)
    prod = ChoiSet(list(tensor_choi_sets(cs, cs)) + list(extra), 4, 4, "clifford_hsc")
    dims = (2, 2, 2, 2)
    for _ in range(3):
        r1, r2, s1, s2 = (random_density((2, 2), rng).mat for _ in range(4))
        joint_r = permute_subsystems(np.kron(r1, r2), dims, (0, 2, 1, 3))
        joint_s = permute_subsystems(np.kron(s1, s2), dims, (0, 2, 1, 3))
        lhs = comp_dmax(joint_r, joint_s, prod).value
        assert lhs >= comp_dmax(r1, s1, cs).value + comp_dmax(r2, s2, cs).value - 1e-9


@pytest.mark.parametrize("eta", [0.05, 0.1, 0.2, 0.3])
def test_dh_equals_dmax_against_marginal(eta):
    rng = np.random.default_rng(9)
    cs = rich_set()
    rho = random_density((2, 2), rng).mat
    sigma = np.kron(np.eye(2), ptrace(rho, (2, 2), (1,)))
    dh = comp_dh(rho, sigma, cs, eta)
    if dh.infeasible:
        pytest.skip("eta infeasible for this state")
    assert abs(dh.value - comp_dmax(rho, sigma, cs).value) < 1e-9


def test_dh_infeasible_and_single():
    cs = omega_set()
    rho = np.kron(KET0, np.eye(2) / 2)
    assert comp_dh(rho, np.eye(4) / 4, cs, 0.9).infeasible
    r = comp_dh(OMEGA, np.eye(4) / 4, cs, 0.5)
    assert abs(r.value - (-np.log2((0.5 / 2) / (2 / 2)))) < 1e-12
    with pytest.raises(ValueError):
        comp_dh(OMEGA, OMEGA, cs, 0.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), eta=st.floats(0.02, 0.6))
def test_dh_pair_search_matches_lp(seed, eta):
    rng = np.random.default_rng(seed)
    cs = rich_set()
    rho = random_density((2, 2), rng).mat
    sigma = random_density((2, 2), rng).mat
    a = comp_dh(rho, sigma, cs, eta, method="pairs")
    b = comp_dh(rho, sigma, cs, eta, method="lp")
    assert a.infeasible == b.infeasible
    if not a.infeasible:
        assert abs(a.value - b.value) < 1e-7


def brute_guess(probs, states, povms):
    best = 0.0
    nx = len(states)
    for p in povms:
        for lab in itertools.product(range(nx), repeat=len(p)):
            val = sum(probs[x] * np.trace(p[i] @ states[x]).real for i, x in enumerate(lab))
            best = max(best, val)
    return best


def test_guess_examples():
    povms = flag_povm_set(GateSet.from_labels(["H", "S"]), EnumerationBudget(1, 1), 2, 2).povms
    # S before a basis measurement gives the basis measurement again
    assert len(povms) == 2
    v, _, _ = comp_guess([0.5, 0.5], [KET0, KET1], povms)
    assert abs(v - 1) < 1e-12
    v, _, _ = comp_guess([0.5, 0.5], [KET0, PLUS], povms)
    assert abs(v - 0.75) < 1e-12
    v, _, _ = comp_guess([0.3, 0.7], [PLUS, PLUS], povms)
    assert abs(v - 0.7) < 1e-12
    with pytest.raises(ValidationError):
        comp_guess([0.5, 0.6], [KET0, KET1], povms)


def test_guess_matches_brute_force():
    rng = np.random.default_rng(10)
    povms = flag_povm_set(GS, EnumerationBudget(2, 1, 1), 2, 2).povms
    for _ in range(3):
        states = [random_density((2,), rng).mat for _ in range(3)]
        probs = rng.dirichlet(np.ones(3))
        v, k, lab = comp_guess(probs, states, povms)
        assert abs(v - brute_guess(probs, states, povms)) < 1e-12
        table = guess_table(probs, states, povms[k])
        assert abs(sum(table[i, x] for i, x in enumerate(lab)) - v) < 1e-12


def test_measured_dmax():
    povms = flag_povm_set(GateSet.from_labels(["H"]), EnumerationBudget(1, 1), 2, 2).povms
    assert abs(measured_dmax(KET0, np.eye(2) / 2, povms).value - 1) < 1e-12
    assert measured_dmax(PLUS, PLUS, povms).value == 0.0
    rng = np.random.default_rng(11)
    rich = flag_povm_set(GS, EnumerationBudget(2, 1, 1), 2, 2).povms
    for _ in range(5):
        r = random_density((2,), rng).mat
        s = random_density((2,), rng).mat
        assert measured_dmax(r, s, rich).value <= dmax_exact(r, s) + 1e-9


def test_op_norm_examples():
    prep = prep_set()
    assert abs(comp_op_norm(np.eye(2), prep)[0] - 1) < 1e-12
    assert abs(comp_op_norm(KET1, prep)[0] - 0.5) < 1e-12


def test_op_norm_seminorm():
    rng = np.random.default_rng(12)
    prep = prep_set()
    for _ in range(10):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        y = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        x, y = x + x.conj().T, y + y.conj().T
        c = rng.normal()
        nx, ny = comp_op_norm(x, prep)[0], comp_op_norm(y, prep)[0]
        assert comp_op_norm(x + y, prep)[0] <= nx + ny + 1e-12
        assert abs(comp_op_norm(c * x, prep)[0] - abs(c) * nx) < 1e-12


def test_hmin_noncond_examples():
    prep = prep_set()
    assert abs(comp_hmin_noncond(np.eye(2) / 2, prep).computational - 1) < 1e-12
    assert abs(comp_hmin_noncond(PLUS, prep).computational) < 1e-12
    assert abs(comp_hmin_noncond(KET1, prep).computational - 1) < 1e-12
    rng = np.random.default_rng(13)
    for _ in range(5):
        rep = comp_hmin_noncond(random_density((2,), rng).mat, prep)
        assert rep.computational >= rep.informational - 1e-9
