"""Gate sets, circuit descriptions, synthesis and bounded enumeration."""
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .config import TOL

_S2 = 1.0 / np.sqrt(2.0)

LIBRARY = {
    "I": np.eye(2),
    "H": np.array([[_S2, _S2], [_S2, -_S2]]),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}

BUILTIN_SETS = {
    "clifford_hsc": ("H", "S", "CNOT"),
    "universal_htc": ("H", "T", "CNOT"),
}


class GateSetError(ValueError):
    pass


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    label: str
    matrix: np.ndarray

    @property
    def arity(self):
        return int(np.log2(self.matrix.shape[0]))


@dataclass(frozen=True)
class GateSet:
    """Finite collection of labelled unitary gates."""

    name: str
    gates: tuple

    def __post_init__(self):
        labels = [g.label for g in self.gates]
        if len(set(labels)) != len(labels):
            raise GateSetError(f"duplicate gate labels in {labels}")
        for g in self.gates:
            m = g.matrix
            d = m.shape[0]
            if m.shape != (d, d) or d < 2 or d & (d - 1):
                raise GateSetError(f"gate {g.label} is not a qubit gate")
            if np.abs(m.conj().T @ m - np.eye(d)).max() > 1e-10:
                raise GateSetError(f"gate {g.label} is not unitary")

    @classmethod
    def from_labels(cls, labels, name=None):
        gates = []
        for lab in labels:
            if lab not in LIBRARY:
                raise GateSetError(f"unknown gate label {lab!r}")
            gates.append(Gate(lab, np.asarray(LIBRARY[lab], dtype=np.complex128)))
        return cls(name or "{" + ",".join(labels) + "}", tuple(gates))

    @property
    def labels(self):
        return tuple(g.label for g in self.gates)

    @property
    def max_arity(self):
        return max(g.arity for g in self.gates)

    def __len__(self):
        return len(self.gates)

    def gate(self, label):
        for g in self.gates:
            if g.label == label:
                return g
        raise CircuitError(f"gate label {label!r} is not in gate set {self.name}")


def parse_gate_matrix(text):
    """Parse ``"re,im re,im; re,im re,im"`` (rows separated by ``;``)."""
    rows = []
    for row in text.split(";"):
        entries = []
        for tok in row.split():
            parts = tok.split(",")
            if len(parts) == 1:
                entries.append(complex(parts[0].replace("i", "j")))
            else:
                entries.append(float(parts[0]) + 1j * float(parts[1]))
        rows.append(entries)
    return np.array(rows, dtype=np.complex128)


def gate_set(name, custom=None):
    """Look up a builtin gate set or assemble ``custom`` (label -> spec).

    Custom entries map a label to either a library gate name or an inline
    matrix string accepted by :func:`parse_gate_matrix`.
    """
    if name in BUILTIN_SETS:
        return GateSet.from_labels(BUILTIN_SETS[name], name)
    if name == "custom":
        if not custom:
            raise GateSetError("custom gate set needs at least one gate")
        gates = []
        for label, spec in custom.items():
            spec = spec.strip()
            if spec in LIBRARY:
                m = np.asarray(LIBRARY[spec], dtype=np.complex128)
            else:
                try:
                    m = parse_gate_matrix(spec)
                except ValueError as exc:
                    raise GateSetError(f"bad matrix for gate {label}: {exc}") from exc
            gates.append(Gate(label, m))
        return GateSet("custom", tuple(gates))
    raise GateSetError(f"unknown gate set {name!r}")


_OP_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\(([\d,\s]*)\)\s*$")


@dataclass(frozen=True)
class Circuit:
    """Ordered gate applications on ``wires`` qubit wires."""

    wires: int
    ops: tuple = ()

    def __post_init__(self):
        ops = tuple((str(lab), tuple(int(w) for w in ws)) for lab, ws in self.ops)
        object.__setattr__(self, "ops", ops)

    @property
    def gate_count(self):
        return len(self.ops)

    def touched(self):
        return sorted({w for _, ws in self.ops for w in ws})

    def to_text(self):
        if not self.ops:
            return "-"
        return ";".join(f"{lab}({','.join(map(str, ws))})" for lab, ws in self.ops)

    @classmethod
    def from_text(cls, text, wires):
        text = text.strip()
        if text in ("", "-"):
            return cls(wires, ())
        ops = []
        for chunk in text.split(";"):
            m = _OP_RE.match(chunk)
            if not m:
                raise CircuitError(f"cannot parse gate application {chunk!r}")
            ws = tuple(int(w) for w in m.group(2).split(",") if w.strip())
            ops.append((m.group(1), ws))
        return cls(wires, tuple(ops))

    def then(self, label, wires):
        return Circuit(self.wires, self.ops + ((label, tuple(wires)),))


def _check_op(gs, label, ws, n_wires):
    g = gs.gate(label)
    if len(ws) != g.arity:
        raise CircuitError(f"gate {label} needs {g.arity} wires, got {ws}")
    if len(set(ws)) != len(ws):
        raise CircuitError(f"wire collision in {label}{ws}")
    if any(w < 0 or w >= n_wires for w in ws):
        raise CircuitError(f"wire out of range in {label}{ws}")
    return g


def apply_circuit(circuit, gs, mat):
    """Apply ``circuit`` to the rows of ``mat`` (vector or matrix)."""
    for label, ws in circuit.ops:
        g = _check_op(gs, label, ws, circuit.wires)
        mat = kernels.apply_gate(mat, g.matrix, ws, circuit.wires)
    return mat


def synthesize(circuit, gs):
    """Unitary of ``circuit`` on 2**wires dimensions (wire 0 most significant)."""
    return apply_circuit(circuit, gs, np.eye(2**circuit.wires, dtype=np.complex128))


@dataclass(frozen=True)
class EnumerationBudget:
    """Gate budget ``G``, register size ``n`` and ancilla range ``0..a_max``."""

    G: int
    n: int
    a_max: int = 0
    dedup_tol: float = 1e-8

    def __post_init__(self):
        if self.G < 0 or self.n < 0 or self.a_max < 0:
            raise ValueError("budget fields must be non-negative")
        if self.G > TOL.max_gates:
            raise ValueError(f"gate budget {self.G} exceeds cap {TOL.max_gates}")
        if self.n + self.a_max > TOL.max_wires:
            raise ValueError(f"{self.n + self.a_max} wires exceed cap {TOL.max_wires}")


@dataclass(frozen=True, eq=False)
class EnumeratedCircuit:
    circuit: Circuit
    unitary: np.ndarray
    ancillas: int

    @property
    def gate_count(self):
        return self.circuit.gate_count


def phase_canonical(u, tol=1e-6):
    """Remove the global phase so the first (near-)largest entry is real positive."""
    flat = u.reshape(-1)
    mag = np.abs(flat)
    k = int(np.argmax(mag >= mag.max() - tol))
    return u * (abs(flat[k]) / flat[k])


def matrix_key(m, decimals=8):
    r = np.round(np.asarray(m, dtype=np.complex128), decimals) + (0.0 + 0.0j)
    return r.tobytes()


class _Dedup:
    """Hash-bucketed set of matrices with an explicit Frobenius check."""

    def __init__(self, tol, decimals=8):
        self.tol = tol
        self.decimals = decimals
        self.buckets = {}

    def add(self, m):
        key = matrix_key(m, self.decimals)
        bucket = self.buckets.setdefault(key, [])
        for other in bucket:
            if np.linalg.norm(other - m) <= self.tol:
                return False
        bucket.append(m)
        return True


def placements(gs, n_wires):
    """All (label, wires) applications of ``gs`` on ``n_wires`` in fixed order."""
    import itertools

    out = []
    for g in gs.gates:
        for ws in itertools.permutations(range(n_wires), g.arity):
            out.append((g.label, ws))
    return out


def _enumerate_fixed(gs, n_wires, G, tol):
    seen = _Dedup(tol)
    ident = np.eye(2**n_wires, dtype=np.complex128)
    seen.add(phase_canonical(ident))
    frontier = [(Circuit(n_wires), ident)]
    found = list(frontier)
    moves = placements(gs, n_wires)
    mats = {lab: gs.gate(lab).matrix for lab, _ in moves}
    for _ in range(G):
        nxt = []
        for circ, u in frontier:
            for lab, ws in moves:
                v = kernels.apply_gate(u, mats[lab], ws, n_wires)
                if seen.add(phase_canonical(v)):
                    nxt.append((circ.then(lab, ws), v))
        found.extend(nxt)
        frontier = nxt
        if not frontier:
            break
    return found


def enumerate_circuits(gs, budget):
    """Distinct unitaries reachable with at most ``budget.G`` gates.

    For each ancilla count ``a`` the search runs breadth-first on ``n + a``
    wires, so every unitary is recorded with a minimal gate count. Unitaries
    equal up to global phase are merged. An entry with ``a`` ancillas is kept
    only when its circuit touches every ancilla wire; otherwise it duplicates
    an entry with fewer ancillas.
    """
    if budget.a_max > gs.max_arity * budget.G:
        raise ValueError("a_max exceeds max_arity * G")
    out = []
    for a in range(budget.a_max + 1):
        n_wires = budget.n + a
        if n_wires == 0:
            continue
        for circ, u in _enumerate_fixed(gs, n_wires, budget.G, budget.dedup_tol):
            touched = set(circ.touched())
            if all(w in touched for w in range(budget.n, n_wires)):
                out.append(EnumeratedCircuit(circ, u, a))
    return out


def count_bound(gs, n, G):
    """Upper bound sum_{m<=G} (|gs| (n + l G)^l)^m on distinct circuits."""
    ell = gs.max_arity
    base = len(gs) * (n + ell * G) ** ell
    return sum(base**m for m in range(G + 1))
