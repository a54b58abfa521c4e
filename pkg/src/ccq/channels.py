"""Quantum channels from circuits and their (dual) Choi operators.

A channel from register B to register A' is a circuit on ``n_B + a`` wires:
the first ``n_B`` wires carry the input, the remaining ``a`` start in |0>.
After the circuit the wires listed in ``out_wires`` form the output and all
other wires are traced out.

The Choi operator of the dual map T* is stored in factored form,
``J = sum_k |w_k><w_k|`` on A (x) B, with ``w_k = conj(vec(K_k))`` for the
Kraus operators ``K_k`` of T. Expectations ``Tr[rho J]`` never need the full
matrix.
"""
import hashlib
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import log2

import numpy as np

from . import circuits as cq
from .config import TOL
from .densemath import (
    DensityOperator,
    ValidationError,
    dagger,
    herm_eig,
    max_entangled,
    permute_subsystems,
    ptrace,
)


def _qubits(d, what):
    n = int(round(log2(d))) if d >= 1 else -1
    if n < 0 or 2**n != d:
        raise ValidationError(f"{what} dimension {d} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Circuit plus wire roles describing a channel B -> A'."""

    circuit: cq.Circuit
    gate_set: cq.GateSet
    n_in: int
    out_wires: tuple
    ancillas: int = field(init=False)

    def __post_init__(self):
        out = tuple(int(w) for w in self.out_wires)
        n = self.circuit.wires
        if self.n_in > n or len(set(out)) != len(out) or any(w < 0 or w >= n for w in out):
            raise ValidationError("invalid wire roles for channel")
        object.__setattr__(self, "out_wires", out)
        object.__setattr__(self, "ancillas", n - self.n_in)

    @classmethod
    def standard(cls, circuit, gate_set, n_in, n_out):
        """Inputs on the first ``n_in`` wires, output on the first ``n_out``."""
        return cls(circuit, gate_set, n_in, tuple(range(n_out)))

    @property
    def d_in(self):
        return 2**self.n_in

    @property
    def d_out(self):
        return 2 ** len(self.out_wires)

    @property
    def env_wires(self):
        return tuple(w for w in range(self.circuit.wires) if w not in self.out_wires)

    @cached_property
    def unitary(self):
        return cq.synthesize(self.circuit, self.gate_set)

    @cached_property
    def isometry(self):
        """V = U (1_B (x) |0..0>) with rows ordered (out wires, env wires)."""
        n = self.circuit.wires
        cols = np.arange(self.d_in) * 2**self.ancillas
        v = self.unitary[:, cols]
        t = v.reshape((2,) * n + (self.d_in,))
        t = np.transpose(t, self.out_wires + self.env_wires + (n,))
        return t.reshape(2**n, self.d_in)

    @cached_property
    def kraus(self):
        """Kraus operators of shape (d_env, d_out, d_in)."""
        d_env = 2 ** len(self.env_wires)
        return np.transpose(self.isometry.reshape(self.d_out, d_env, self.d_in), (1, 0, 2))

    def label(self):
        return self.circuit.to_text()


def channel_apply(spec, rho):
    """T(rho) = tr_K[U (rho (x) |0><0|) U^dagger]."""
    m = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=np.complex128)
    k = spec.kraus
    return np.einsum("kab,bc,kdc->ad", k, m, k.conj())


def dual_apply(spec, x):
    """T*(X) = <0| U^dagger (X (x) 1_K) U |0>."""
    x = np.asarray(x, dtype=np.complex128)
    k = spec.kraus
    return np.einsum("kba,bc,kcd->ad", k.conj(), x, k)


@dataclass(frozen=True, eq=False)
class ChoiOperator:
    """Choi operator of a dual map on A (x) B, held as ``J = factor^T conj(factor)``."""

    factor: np.ndarray
    d_A: int
    d_B: int
    gate_count: int = 0
    label: str = ""
    spec: ChannelSpec = None

    @cached_property
    def mat(self):
        f = self.factor
        return f.T @ f.conj()

    @property
    def dim(self):
        return self.d_A * self.d_B

    @classmethod
    def from_matrix(cls, j, d_A, d_B, label="", gate_count=0):
        w, v = herm_eig(j) if j.shape[0] <= 256 else np.linalg.eigh(j)
        keep = w > TOL.psd * max(1.0, float(np.abs(w).max(initial=0.0)))
        if np.any(w < -TOL.psd * max(1.0, float(np.abs(w).max(initial=0.0)))):
            raise ValidationError("Choi operator is not positive semidefinite")
        factor = (v[:, keep] * np.sqrt(w[keep])).T
        return cls(np.ascontiguousarray(factor), d_A, d_B, gate_count, label)

    def expectation(self, rho):
        m = rho.mat if isinstance(rho, DensityOperator) else rho
        f = self.factor
        return float(np.real(np.sum((f.conj() @ m) * f)))


def choi_of(spec, d_A=None):
    """Choi operator J(T*) = d_A (Id (x) T*)(|Omega><Omega|) on A (x) B."""
    d_A = spec.d_out if d_A is None else d_A
    if d_A != spec.d_out:
        raise ValidationError(f"channel outputs dimension {spec.d_out}, not {d_A}")
    k = spec.kraus
    factor = np.ascontiguousarray(k.reshape(k.shape[0], -1).conj())
    return ChoiOperator(factor, d_A, spec.d_in, spec.circuit.gate_count, spec.label(), spec)


def choi_from_dual(dual, d_A, d_B):
    """Reference construction sum_{xy} |x><y| (x) T*(|x><y|) from a dual map callable."""
    j = np.zeros((d_A * d_B, d_A * d_B), dtype=np.complex128)
    for x in range(d_A):
        for y in range(d_A):
            e = np.zeros((d_A, d_A), dtype=np.complex128)
            e[x, y] = 1.0
            j[x * d_B:(x + 1) * d_B, y * d_B:(y + 1) * d_B] = dual(e)
    return j


def choi_from_channel(channel, d_B, d_A):
    """Reference construction from the forward map: swap of the transposed J(T)."""
    jt = np.zeros((d_B * d_A, d_B * d_A), dtype=np.complex128)
    for x in range(d_B):
        for y in range(d_B):
            e = np.zeros((d_B, d_B), dtype=np.complex128)
            e[x, y] = 1.0
            jt[x * d_A:(x + 1) * d_A, y * d_A:(y + 1) * d_A] = channel(e)
    return permute_subsystems(jt.T, (d_B, d_A), (1, 0))


def dual_from_choi(j, x, d_A, d_B):
    """Recover T*(X) = tr_A[J (X^T (x) 1_B)]."""
    m = j.mat if isinstance(j, ChoiOperator) else j
    return ptrace(m @ np.kron(np.asarray(x).T, np.eye(d_B)), (d_A, d_B), (1,))


def normalized_effect(j):
    """E = J / d_A, a 0 <= E <= 1 effect on A (x) B."""
    return j.mat / j.d_A


def identity_choi(d):
    """d |Omega><Omega|, the Choi operator of the identity channel."""
    omega = max_entangled(d).vec
    return d * np.outer(omega, omega.conj())


def simulate_choi_effect_test(j, rho, shots, rng, sample=0):
    """Monte-Carlo estimate of Tr[rho J] from the physical test procedure.

    Alice's half A of ``rho`` is kept; the channel isometry acts on B, giving
    A (x) A' (x) K. The pair AA' is measured with {Omega, 1 - Omega}; the
    success frequency times d_A estimates Tr[rho J].

    Returns ``(estimate, standard_error)``.
    """
    spec = j.spec
    if spec is None:
        raise ValidationError("effect test needs a circuit-backed Choi operator")
    m = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho)
    d_A, d_B = j.d_A, j.d_B
    v = spec.isometry
    d_env = v.shape[0] // d_A
    big = np.kron(np.eye(d_A), v)
    out = big @ m @ dagger(big)
    omega = max_entangled(d_A).vec
    proj = np.kron(np.outer(omega, omega.conj()), np.eye(d_env))
    p = float(np.clip(np.real(np.trace(proj @ out)), 0.0, 1.0))
    hits = int(np.count_nonzero(rng.uniforms(sample, shots, stream=7) <= p))
    freq = hits / shots
    return d_A * freq, d_A * np.sqrt(max(p * (1 - p), 1e-300) / shots)


def _content_hash(m):
    return hashlib.sha256(cq.matrix_key(m, TOL.dedup_decimals)).hexdigest()[:16]


@dataclass(eq=False)
class ChoiSet:
    """Finite list of generators spanning a computational cone."""

    generators: list
    d_A: int
    d_B: int
    gate_set: str = ""
    budget: cq.EnumerationBudget = None

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i):
        return self.generators[i]

    @cached_property
    def _stacked(self):
        rows = [g.factor for g in self.generators]
        owner = np.concatenate([np.full(len(r), i) for i, r in enumerate(rows)])
        return np.ascontiguousarray(np.vstack(rows)), owner

    def expectations(self, rho):
        """Vector of Tr[rho J_i]."""
        m = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=np.complex128)
        if m.shape != (self.d_A * self.d_B,) * 2:
            raise ValidationError(f"state of shape {m.shape} does not match ChoiSet on {self.d_A}x{self.d_B}")
        w, owner = self._stacked
        vals = np.real(np.sum((w.conj() @ m) * w, axis=1))
        return np.bincount(owner, weights=vals, minlength=len(self))

    def expectations_pure(self, psi):
        """Vector of <psi| J_i |psi> for a ket on A (x) B."""
        v = psi.vec if hasattr(psi, "vec") else np.asarray(psi, dtype=np.complex128)
        w, owner = self._stacked
        vals = np.abs(w.conj() @ v) ** 2
        return np.bincount(owner, weights=vals, minlength=len(self))

    def marginal_expectations(self, sigma_B):
        """Vector of Tr[(1_A (x) sigma_B) J_i] without forming the product."""
        s = sigma_B.mat if isinstance(sigma_B, DensityOperator) else np.asarray(sigma_B)
        w, owner = self._stacked
        t = w.reshape(len(w), self.d_A, self.d_B)
        vals = np.real(np.einsum("rab,bc,rac->r", t.conj(), s, t))
        return np.bincount(owner, weights=vals, minlength=len(self))

    def label(self, i):
        return self.generators[i].label

    # -- manifest ---------------------------------------------------------

    def export_manifest(self):
        lines = [
            "# ccq choi-set manifest v1",
            f"d_A={self.d_A}",
            f"d_B={self.d_B}",
            f"gateset={self.gate_set}",
        ]
        for g in self.generators:
            if g.spec is None:
                raise ValidationError("only circuit-backed generators can be exported")
            s = g.spec
            outs = ",".join(map(str, s.out_wires))
            lines.append(
                f"{s.circuit.to_text()}\twires={s.circuit.wires}\tin={s.n_in}\tout={outs}"
                f"\tgates={g.gate_count}\thash={_content_hash(g.mat)}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def import_manifest(cls, text, gate_set):
        """Rebuild generators from circuits and check every content hash."""
        head, gens = {}, []
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                key, _, val = line.partition("=")
                head[key.strip()] = val.strip()
                continue
            circ_text, *fields = line.split("\t")
            kv = dict(f.split("=", 1) for f in fields)
            circ = cq.Circuit.from_text(circ_text, int(kv["wires"]))
            outs = tuple(int(w) for w in kv["out"].split(",") if w)
            spec = ChannelSpec(circ, gate_set, int(kv["in"]), outs)
            j = choi_of(spec)
            if _content_hash(j.mat) != kv["hash"]:
                raise ValidationError(f"hash mismatch for generator {circ_text}")
            gens.append(j)
        return cls(gens, int(head["d_A"]), int(head["d_B"]), head.get("gateset", ""))


class _ChoiDedup:
    def __init__(self, max_dim=1024):
        self.seen = cq._Dedup(TOL.dedup, TOL.dedup_decimals)
        self.max_dim = max_dim

    def add(self, j):
        if j.dim > self.max_dim:
            return True
        return self.seen.add(j.mat)


def prepare_zero_spec(gs, n_in, n_out):
    """Trace the input and output |0...0>."""
    circ = cq.Circuit(n_in + n_out)
    return ChannelSpec(circ, gs, n_in, tuple(range(n_in, n_in + n_out)))


def prepare_mixed_spec(n_in, n_out):
    """Trace the input and output the maximally mixed state (Bell pairs, half kept)."""
    gs = cq.GateSet.from_labels(["H", "CNOT"])
    ops = []
    for i in range(n_out):
        a, b = n_in + i, n_in + n_out + i
        ops += [("H", (a,)), ("CNOT", (a, b))]
    circ = cq.Circuit(n_in + 2 * n_out, tuple(ops))
    return ChannelSpec(circ, gs, n_in, tuple(range(n_in, n_in + n_out)))


def identity_spec(gs, n):
    return ChannelSpec.standard(cq.Circuit(n), gs, n, n)


def generate_choi_set(gs, budget, d_A, d_B, output_subsets=False, reference_channels=False):
    """Choi operators of all budget-limited circuit channels B -> A'.

    Parameters
    ----------
    gs : GateSet
    budget : EnumerationBudget
        ``budget.n`` must equal the number of qubits of B.
    d_A, d_B : int
        Output and input dimensions (powers of two).
    output_subsets : bool
        Also emit every other choice of output wires, not just the first ones.
    reference_channels : bool
        Append the trace-and-prepare |0> and maximally mixed channels.
    """
    n_A = _qubits(d_A, "output")
    n_B = _qubits(d_B, "input")
    if budget.n != n_B:
        raise ValidationError(f"budget register size {budget.n} != {n_B} input qubits")
    if (d_A * d_B) ** 2 > TOL.max_comp_dim**2:
        raise ValidationError("ChoiSet dimension exceeds the computational cap")
    seen = _ChoiDedup()
    gens = []

    def push(spec):
        j = choi_of(spec, d_A)
        if seen.add(j):
            gens.append(j)

    for ent in cq.enumerate_circuits(gs, budget):
        n_wires = ent.circuit.wires
        if n_A > n_wires:
            continue
        choices = itertools.combinations(range(n_wires), n_A) if output_subsets else [tuple(range(n_A))]
        for outs in choices:
            spec = ChannelSpec(ent.circuit, gs, n_B, outs)
            spec.__dict__["unitary"] = ent.unitary
            push(spec)
    if reference_channels:
        push(prepare_zero_spec(gs, n_B, n_A))
        push(prepare_mixed_spec(n_B, n_A))
    return ChoiSet(gens, d_A, d_B, gs.name, budget)


# ---------------------------------------------------------------------------
# Other generator families


_SINGLE_STATES = {
    "0": np.array([1, 0], dtype=np.complex128),
    "1": np.array([0, 1], dtype=np.complex128),
    "+": np.array([1, 1], dtype=np.complex128) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=np.complex128) / np.sqrt(2),
}
_PAULI = {
    "1": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.diag([1, -1]).astype(np.complex128),
}


def _kron_all(vs):
    out = np.ones(1 if vs[0].ndim == 1 else (1, 1), dtype=np.complex128)
    for v in vs:
        out = np.kron(out, v)
    return out


def pauli_mp_family(n, dedup=True):
    """Measure-and-prepare channels J = s^T (x) E_Q + 0^T (x) (1 - E_Q).

    ``s`` runs over products of {|0>,|1>,|+>,|+i>}, ``Q`` over signed Pauli
    strings and ``E_Q = (1 + Q) / 2``. Before deduplication there are
    ``4**n * 2 * 4**n`` channels.
    """
    if not 1 <= n <= 3:
        raise ValidationError("pauli_mp_family supports 1 to 3 qubits")
    d = 2**n
    zero = _kron_all([_SINGLE_STATES["0"]] * n)
    seen = _ChoiDedup()
    gens = []
    for s_lab in itertools.product(_SINGLE_STATES, repeat=n):
        s = _kron_all([_SINGLE_STATES[x] for x in s_lab])
        for sign in (1, -1):
            for q_lab in itertools.product(_PAULI, repeat=n):
                q = sign * _kron_all([_PAULI[x] for x in q_lab])
                w, v = np.linalg.eigh(q)
                pos, neg = v[:, w > 0], v[:, w < 0]
                rows = [np.kron(s.conj(), pos[:, i]) for i in range(pos.shape[1])]
                rows += [np.kron(zero.conj(), neg[:, i]) for i in range(neg.shape[1])]
                label = f"s={''.join(s_lab)};Q={'+' if sign > 0 else '-'}{''.join(q_lab)}"
                j = ChoiOperator(np.array(rows), d, d, 0, label)
                if not dedup or seen.add(j):
                    gens.append(j)
    return ChoiSet(gens, d, d, "pauli_mp")


def _hermitian_coords(m):
    """Real coordinates of a Hermitian matrix preserving the trace inner product."""
    d = m.shape[0]
    iu = np.triu_indices(d, 1)
    return np.concatenate([np.real(np.diag(m)), np.sqrt(2) * m[iu].real, np.sqrt(2) * m[iu].imag])


def informational_completeness_rank(cs, tol=TOL):
    """Rank of the real span of the generators and whether it is full.

    Full means rank ``d_A^2 d_B^2 - d_B^2 + 1``, the dimension of the affine
    hull fixed by the constraint tr_A J = 1_B plus one.
    """
    x = np.array([_hermitian_coords(g.mat) for g in cs.generators])
    gram = x @ x.T if x.shape[0] <= x.shape[1] else x.T @ x
    w = np.linalg.eigvalsh(gram) if gram.shape[0] > tol.jacobi_max_dim else herm_eig(gram.astype(complex), tol)[0]
    rank = int(np.count_nonzero(w > tol.rank))
    target = cs.d_A**2 * cs.d_B**2 - cs.d_B**2 + 1
    return rank, rank == target


@dataclass(eq=False)
class PreparableSet:
    states: list
    circuits: list

    def __len__(self):
        return len(self.states)


def preparable_states(gs, budget, d_A):
    """Reduced outputs on the first n_A wires of circuits applied to |0...0>."""
    n_A = _qubits(d_A, "output")
    if budget.n != n_A:
        raise ValidationError(f"budget register size {budget.n} != {n_A}")
    seen = cq._Dedup(TOL.dedup, TOL.dedup_decimals)
    states, circs = [], []
    for ent in cq.enumerate_circuits(gs, budget):
        n = ent.circuit.wires
        psi = ent.unitary[:, 0]
        m = ptrace(np.outer(psi, psi.conj()), (2,) * n, tuple(range(n_A)))
        if seen.add(m):
            states.append(DensityOperator(m, (d_A,)))
            circs.append(ent.circuit)
    return PreparableSet(states, circs)


@dataclass(eq=False)
class FlaggedPovmSet:
    """POVMs (arrays of shape outcomes x d_B x d_B) with their circuits."""

    povms: list
    circuits: list
    d_B: int

    def __len__(self):
        return len(self.povms)

    def choi_set(self):
        """Pinched generators sum_i |i><i| (x) E_i on X (x) B."""
        gens = []
        for p, c in zip(self.povms, self.circuits):
            gens.append(flagged_choi(p, c.to_text() if c is not None else ""))
        return ChoiSet(gens, self.povms[0].shape[0], self.d_B, "flagged")


def flagged_choi(povm, label=""):
    n_out, d_B = povm.shape[0], povm.shape[1]
    j = np.zeros((n_out * d_B, n_out * d_B), dtype=np.complex128)
    for i, e in enumerate(povm):
        j[i * d_B:(i + 1) * d_B, i * d_B:(i + 1) * d_B] = e
    return ChoiOperator.from_matrix(j, n_out, d_B, label)


def flag_povm_set(gs, budget, d_B, outcomes):
    """POVMs read from the first log2(outcomes) wires of budget-limited circuits.

    E_i = <0| U^dagger (|i><i| (x) 1) U |0>, with the input on the first n_B
    wires and the ancillas in |0>.
    """
    n_B = _qubits(d_B, "input")
    q = _qubits(outcomes, "outcome")
    if budget.n != n_B:
        raise ValidationError(f"budget register size {budget.n} != {n_B}")
    seen = cq._Dedup(TOL.dedup, TOL.dedup_decimals)
    povms, circs = [], []
    for ent in cq.enumerate_circuits(gs, budget):
        n = ent.circuit.wires
        if q > n:
            continue
        a = n - n_B
        v = ent.unitary[:, np.arange(d_B) * 2**a].reshape(outcomes, -1, d_B)
        p = np.einsum("irb,irc->ibc", v.conj(), v)
        if seen.add(p):
            povms.append(p)
            circs.append(ent.circuit)
    return FlaggedPovmSet(povms, circs, d_B)


def tensor_choi_sets(cs1, cs2):
    """Generators J1 (x) J2 reordered to (A1 A2) (x) (B1 B2)."""
    gens = []
    dims = (cs1.d_A, cs1.d_B, cs2.d_A, cs2.d_B)
    for g1 in cs1:
        for g2 in cs2:
            rows = np.einsum("ia,jb->ijab", g1.factor, g2.factor).reshape(-1, np.prod(dims))
            rows = np.array([permute_subsystems(r, dims, (0, 2, 1, 3)) for r in rows])
            gens.append(ChoiOperator(rows, cs1.d_A * cs2.d_A, cs1.d_B * cs2.d_B,
                                     g1.gate_count + g2.gate_count, f"{g1.label}|{g2.label}"))
    return ChoiSet(gens, cs1.d_A * cs2.d_A, cs1.d_B * cs2.d_B, "product")
