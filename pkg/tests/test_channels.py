import numpy as np
import pytest

from ccq.channels import (
    ChannelSpec,
    ChoiSet,
    channel_apply,
    choi_from_channel,
    choi_from_dual,
    choi_of,
    dual_apply,
    dual_from_choi,
    flag_povm_set,
    generate_choi_set,
    identity_choi,
    informational_completeness_rank,
    normalized_effect,
    pauli_mp_family,
    prepare_mixed_spec,
    prepare_zero_spec,
    preparable_states,
    simulate_choi_effect_test,
    tensor_choi_sets,
)
from ccq.circuits import Circuit, EnumerationBudget, GateSet, gate_set
from ccq.densemath import ValidationError, max_entangled, ptrace, random_density
from ccq.rng import SeededRng

GS = gate_set("clifford_hsc")


def some_specs():
    cs = generate_choi_set(GS, EnumerationBudget(2, 1, 2), 2, 2, output_subsets=True)
    specs = [g.spec for g in cs]
    cs2 = generate_choi_set(GS, EnumerationBudget(2, 2, 1), 2, 4)
    specs += [g.spec for g in cs2]
    specs += [prepare_zero_spec(GS, 1, 1), prepare_mixed_spec(1, 1), prepare_mixed_spec(2, 1)]
    return specs


SPECS = some_specs()


def test_identity_and_reference_choi():
    omega = max_entangled(2).vec
    cs = generate_choi_set(GS, EnumerationBudget(0, 1), 2, 2)
    assert len(cs) == 1
    assert np.abs(cs[0].mat - 2 * np.outer(omega, omega)).max() < 1e-12
    assert np.abs(identity_choi(2) - cs[0].mat).max() < 1e-12
    j0 = choi_of(prepare_zero_spec(GS, 1, 1)).mat
    assert np.abs(j0 - np.kron(np.diag([1, 0]), np.eye(2))).max() < 1e-12
    jm = choi_of(prepare_mixed_spec(1, 1)).mat
    assert np.abs(jm - np.eye(4) / 2).max() < 1e-12


def test_budget_one_generators():
    cs = generate_choi_set(GS, EnumerationBudget(1, 1), 2, 2)
    assert [g.label for g in cs] == ["-", "H(0)", "S(0)"]
    assert [g.gate_count for g in cs] == [0, 1, 1]


@pytest.mark.parametrize("idx", range(0, len(SPECS), 3))
def test_choi_routes_agree(idx):
    spec = SPECS[idx]
    d_A, d_B = spec.d_out, spec.d_in
    j = choi_of(spec).mat
    j_dual = choi_from_dual(lambda x: dual_apply(spec, x), d_A, d_B)
    j_fwd = choi_from_channel(lambda x: channel_apply(spec, x), d_B, d_A)
    assert np.abs(j - j_dual).max() < 1e-10
    assert np.abs(j - j_fwd).max() < 1e-10


@pytest.mark.parametrize("idx", range(0, len(SPECS), 2))
def test_choi_invariants(idx, rng):
    spec = SPECS[idx]
    d_A, d_B = spec.d_out, spec.d_in
    j = choi_of(spec)
    assert np.abs(j.mat - j.mat.conj().T).max() < 1e-10
    assert np.linalg.eigvalsh(j.mat).min() > -1e-10
    assert np.abs(ptrace(j.mat, (d_A, d_B), (1,)) - np.eye(d_B)).max() < 1e-10
    x = rng.normal(size=(d_A, d_A)) + 1j * rng.normal(size=(d_A, d_A))
    assert np.abs(dual_from_choi(j, x, d_A, d_B) - dual_apply(spec, x)).max() < 1e-10
    e = normalized_effect(j)
    w = np.linalg.eigvalsh(e)
    assert w.min() > -1e-10 and w.max() < 1 + 1e-10


@pytest.mark.parametrize("idx", range(0, len(SPECS), 4))
def test_adjoint_identity_and_unital(idx, rng):
    spec = SPECS[idx]
    d_A, d_B = spec.d_out, spec.d_in
    rho = random_density((d_B,), rng).mat
    x = rng.normal(size=(d_A, d_A)) + 1j * rng.normal(size=(d_A, d_A))
    lhs = np.trace(x @ channel_apply(spec, rho))
    rhs = np.trace(dual_apply(spec, x) @ rho)
    assert abs(lhs - rhs) < 1e-10
    assert np.abs(dual_apply(spec, np.eye(d_A)) - np.eye(d_B)).max() < 1e-10
    assert abs(np.trace(channel_apply(spec, rho)) - 1) < 1e-10


def test_expectation_of_choi_is_entanglement_fidelity(rng):
    # Tr[rho J(T*)] = d_A <Omega| (Id (x) T)(rho) |Omega>
    for spec in SPECS[:8]:
        d_A, d_B = spec.d_out, spec.d_in
        if d_A != d_B:
            continue
        rho = random_density((d_A, d_B), rng).mat
        out = sum(np.kron(np.eye(d_A), k) @ rho @ np.kron(np.eye(d_A), k).conj().T for k in spec.kraus)
        omega = max_entangled(d_A).vec
        assert abs(choi_of(spec).expectation(rho) - d_A * np.vdot(omega, out @ omega).real) < 1e-10


def test_effect_test_simulation(rng):
    cs = generate_choi_set(GS, EnumerationBudget(2, 1), 2, 2)
    sim = SeededRng(3)
    for i, j in enumerate(cs.generators):
        rho = random_density((2, 2), rng)
        est, se = simulate_choi_effect_test(j, rho, 100_000, sim, sample=i)
        assert abs(est - j.expectation(rho.mat)) <= 3 * se + 1e-12


def test_pauli_family():
    assert len(pauli_mp_family(1, dedup=False)) == 32
    fam = pauli_mp_family(1)
    rank, full = informational_completeness_rank(fam)
    assert rank == 13 and full
    for g in fam:
        assert np.abs(ptrace(g.mat, (2, 2), (1,)) - np.eye(2)).max() < 1e-12


def test_pauli_family_two_qubits():
    fam = pauli_mp_family(2)
    rank, full = informational_completeness_rank(fam)
    assert rank == 16 * 16 - 16 + 1 and full


def test_completeness_rank_small_set():
    cs = generate_choi_set(GS, EnumerationBudget(1, 1), 2, 2)
    assert informational_completeness_rank(cs) == (3, False)


def test_preparable_states():
    prep = preparable_states(GateSet.from_labels(["H"]), EnumerationBudget(1, 1), 2)
    assert len(prep) == 2
    assert np.allclose(prep.states[0].mat, np.diag([1, 0]))
    assert np.allclose(prep.states[1].mat, np.full((2, 2), 0.5))


def test_preparable_states_with_ancilla_are_mixed():
    prep = preparable_states(GS, EnumerationBudget(2, 1, 1), 2)
    purities = [np.trace(s.mat @ s.mat).real for s in prep.states]
    assert min(purities) < 0.51


def test_flag_povms():
    fp = flag_povm_set(GateSet.from_labels(["H"]), EnumerationBudget(1, 1), 2, 2)
    assert np.allclose(fp.povms[0], [np.diag([1, 0]), np.diag([0, 1])])
    minus = np.array([1, -1]) / np.sqrt(2)
    assert np.allclose(fp.povms[1][1], np.outer(minus, minus))
    fp = flag_povm_set(GS, EnumerationBudget(2, 1, 2), 2, 2)
    for p in fp.povms:
        assert np.abs(p.sum(axis=0) - np.eye(2)).max() < 1e-12
        assert min(np.linalg.eigvalsh(e).min() for e in p) > -1e-12


def test_binary_effect_embedding():
    budget = EnumerationBudget(2, 1, 1)
    fp = flag_povm_set(GS, budget, 2, 2)
    for p, circ in zip(fp.povms, fp.circuits):
        spec = ChannelSpec.standard(circ, GS, 1, 1)
        j = choi_of(spec).mat
        assert np.abs(j[:2, :2] - p[0]).max() < 1e-12


def test_manifest_roundtrip():
    cs = generate_choi_set(GS, EnumerationBudget(2, 1, 1), 2, 2)
    text = cs.export_manifest()
    back = ChoiSet.import_manifest(text, GS)
    assert len(back) == len(cs)
    for a, b in zip(cs, back):
        assert np.abs(a.mat - b.mat).max() < 1e-12
    lines = text.splitlines()
    lines[-1] = lines[-1].replace("hash=", "hash=0")
    with pytest.raises(ValidationError):
        ChoiSet.import_manifest("\n".join(lines), GS)


def test_tensor_choi_sets(rng):
    cs = generate_choi_set(GS, EnumerationBudget(1, 1), 2, 2)
    prod = tensor_choi_sets(cs, cs)
    r1 = random_density((2, 2), rng).mat
    r2 = random_density((2, 2), rng).mat
    from ccq.densemath import permute_subsystems

    joint = permute_subsystems(np.kron(r1, r2), (2, 2, 2, 2), (0, 2, 1, 3))
    expect = np.outer(cs.expectations(r1), cs.expectations(r2)).ravel()
    assert np.abs(prod.expectations(joint) - expect).max() < 1e-12


def test_dimension_mismatch():
    cs = generate_choi_set(GS, EnumerationBudget(1, 1), 2, 2)
    with pytest.raises(ValidationError):
        cs.expectations(np.eye(2) / 2)
    with pytest.raises(ValidationError):
        generate_choi_set(GS, EnumerationBudget(1, 2), 2, 2)
