"""Dense complex linear algebra for finite-dimensional quantum states.

Matrices are plain ``complex128`` numpy arrays. Composite systems are ordered
left to right, so the first entry of ``dims`` is the most significant factor
of the row index.
"""
from dataclasses import dataclass, field
from math import prod

import numpy as np

from . import kernels
from .config import TOL


class ValidationError(ValueError):
    """An operator failed a structural check (shape, hermiticity, trace...)."""


def as_cmatrix(m):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {m.shape}")
    return m


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m, tol=TOL):
    m = as_cmatrix(m)
    return m.shape[0] == m.shape[1] and np.abs(m - dagger(m)).max(initial=0.0) <= tol.hermitian


def min_eig_above(m, bound):
    """True when the Hermitian matrix ``m`` has all eigenvalues above ``bound``.

    Uses a shifted Cholesky factorization, which is much cheaper than a full
    eigendecomposition for large matrices.
    """
    n = m.shape[0]
    try:
        np.linalg.cholesky(m - bound * np.eye(n))
        return True
    except np.linalg.LinAlgError:
        return False


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Validated density matrix on a composite system.

    Parameters
    ----------
    mat : array_like
        Square complex matrix, Hermitian, positive semidefinite, unit trace.
    dims : sequence of int
        Subsystem dimensions whose product equals the matrix size.
    """

    mat: np.ndarray
    dims: tuple = field(default=None)

    def __post_init__(self):
        m = as_cmatrix(self.mat).copy()
        dims = (m.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if m.shape[0] != m.shape[1] or prod(dims) != m.shape[0]:
            raise ValidationError(f"shape {m.shape} does not match dims {dims}")
        if not is_hermitian(m):
            raise ValidationError("density operator is not Hermitian")
        m = (m + dagger(m)) / 2
        if abs(np.trace(m).real - 1.0) > TOL.trace:
            raise ValidationError(f"trace {np.trace(m).real!r} is not 1")
        if not min_eig_above(m, -TOL.psd):
            raise ValidationError("density operator is not positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self):
        return self.mat.shape[0]

    @classmethod
    def from_ket(cls, ket):
        v = ket.vec
        return cls(np.outer(v, v.conj()), ket.dims)

    @classmethod
    def maximally_mixed(cls, dims):
        d = prod(dims)
        return cls(np.eye(d) / d, dims)

    def __matmul__(self, other):
        """Tensor product ``self (x) other``."""
        return DensityOperator(np.kron(self.mat, other.mat), self.dims + other.dims)

    def power(self, k):
        out = self
        for _ in range(k - 1):
            out = out @ self
        return out


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit vector on a composite system."""

    vec: np.ndarray
    dims: tuple = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=np.complex128).reshape(-1).copy()
        dims = (v.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if prod(dims) != v.shape[0]:
            raise ValidationError(f"length {v.shape[0]} does not match dims {dims}")
        if abs(np.linalg.norm(v) - 1.0) > TOL.unit_norm:
            raise ValidationError("ket is not normalized")
        v.flags.writeable = False
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "dims", dims)

    def density(self):
        return DensityOperator.from_ket(self)

    def __matmul__(self, other):
        return Ket(np.kron(self.vec, other.vec), self.dims + other.dims)

    def power(self, k):
        out = self
        for _ in range(k - 1):
            out = out @ self
        return out


def kron(*ms):
    out = np.ones((1, 1), dtype=np.complex128)
    for m in ms:
        out = np.kron(out, m)
    return out


def _keep_tuple(keep, n):
    keep = (keep,) if np.isscalar(keep) else tuple(keep)
    if sorted(set(keep)) != sorted(keep) or any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"invalid subsystem selection {keep}")
    return tuple(sorted(keep))


def ptrace(m, dims, keep):
    """Partial trace of a square matrix over all factors not listed in ``keep``."""
    m = as_cmatrix(m)
    dims = tuple(dims)
    keep = _keep_tuple(keep, len(dims))
    n = len(dims)
    t = m.reshape(dims + dims)
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    rows = letters[:n]
    cols = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    expr = "".join(rows) + "".join(cols) + "->" + "".join(out)
    dk = prod(dims[i] for i in keep)
    return np.einsum(expr, t).reshape(dk, dk)


def partial_trace(rho, keep):
    """Reduced state on the subsystems ``keep`` of a :class:`DensityOperator`."""
    keep = _keep_tuple(keep, len(rho.dims))
    return DensityOperator(ptrace(rho.mat, rho.dims, keep), tuple(rho.dims[i] for i in keep))


def permute_subsystems(m, dims, order):
    """Reorder tensor factors of a square matrix or a vector.

    ``order[i]`` is the old position of the factor placed at position ``i``.
    """
    dims = tuple(dims)
    d = prod(dims)
    n = len(dims)
    new_dims = tuple(dims[o] for o in order)
    if m.ndim == 1:
        return np.transpose(m.reshape(dims), order).reshape(d)
    t = m.reshape(dims + dims)
    t = np.transpose(t, tuple(order) + tuple(n + o for o in order))
    return t.reshape(prod(new_dims), prod(new_dims))


def herm_eig(m, tol=TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Small matrices use the cyclic Jacobi kernel; beyond ``tol.jacobi_max_dim``
    the LAPACK driver is used.
    """
    m = as_cmatrix(m)
    if not is_hermitian(m, tol):
        raise ValidationError("herm_eig requires a Hermitian matrix")
    m = (m + dagger(m)) / 2
    if m.shape[0] <= tol.jacobi_max_dim:
        w, v, _ = kernels.jacobi_eigh(m, tol.jacobi_max_sweeps)
    else:
        w, v = np.linalg.eigh(m)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def herm_eigvals(m, tol=TOL):
    return herm_eig(m, tol)[0]


def psd_sqrt(m, tol=TOL):
    w, v = herm_eig(m, tol)
    w = _clip_negative(w, tol)
    return (v * np.sqrt(w)) @ dagger(v)


def _clip_negative(w, tol):
    if w.size and w.min() < -tol.sqrt_clip:
        raise ValidationError(f"eigenvalue {w.min():.3e} is too negative to clip")
    return np.clip(w, 0.0, None)


def tr_sqrt(rho, tol=TOL):
    """Trace of the square root of a positive semidefinite operator."""
    m = rho.mat if isinstance(rho, DensityOperator) else as_cmatrix(rho)
    return float(np.sum(np.sqrt(_clip_negative(herm_eigvals(m, tol), tol))))


def max_entangled(d):
    """The maximally entangled ket sum_i |ii> / sqrt(d) on d x d."""
    v = np.zeros(d * d, dtype=np.complex128)
    v[:: d + 1] = 1.0 / np.sqrt(d)
    return Ket(v, (d, d))


def overlap_pure(phi, rho):
    """<phi| rho |phi> for a ket and a density operator (or matrix)."""
    v = phi.vec if isinstance(phi, Ket) else np.asarray(phi, dtype=np.complex128)
    m = rho.mat if isinstance(rho, DensityOperator) else as_cmatrix(rho)
    return float(np.real(np.vdot(v, m @ v)))


def trace_norm(m, tol=TOL):
    m = as_cmatrix(m)
    if is_hermitian(m, tol):
        return float(np.sum(np.abs(herm_eigvals(m, tol))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def projector(v):
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def basis_ket(index, d):
    v = np.zeros(d, dtype=np.complex128)
    v[index] = 1.0
    return v


def random_density(dims, rng, rank=None):
    """Random density operator from a complex Gaussian matrix (numpy Generator)."""
    d = prod(dims)
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ dagger(g)
    return DensityOperator(m / np.trace(m).real, dims)


# ---------------------------------------------------------------------------
# Text matrix fixtures


def write_matrix(path_or_file, m):
    """Write ``m`` as ``rows cols`` then one ``re im`` line per entry, row-major."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim == 1:
        m = m[:, None]
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [f"{z.real:.17g} {z.imag:.17g}" for z in m.reshape(-1)]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def read_matrix(path_or_file):
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        rows, cols = (int(x) for x in lines[0].split())
        vals = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"malformed matrix file: {exc}") from exc
    if vals.shape != (rows * cols, 2):
        raise ValidationError(f"expected {rows * cols} entries, found {vals.shape[0]}")
    return (vals[:, 0] + 1j * vals[:, 1]).reshape(rows, cols)
