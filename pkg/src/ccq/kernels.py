"""Hot loops with a numba implementation and a pure-numpy fallback.

The compiled path is used when numba imports cleanly and the environment
variable ``CCQ_NO_NUMBA`` is unset (or ``0``). Both paths implement the same
algorithms; :func:`use_backend` switches at runtime, which the benchmark and
the cross-backend tests rely on.
"""
import math
import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO53 = 1.0 / 9007199254740992.0


def _env_backend():
    flag = os.environ.get("CCQ_NO_NUMBA", "").strip().lower()
    if not HAS_NUMBA or flag not in ("", "0", "false", "no"):
        return "numpy"
    return "numba"


# ---------------------------------------------------------------------------
# Plain-python loop versions (compiled by numba when available)


def _splitmix_scalar(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _uniforms_loop(seed, samples, stream, count):
    out = np.empty((samples.shape[0], count))
    base = _splitmix_scalar(np.uint64(seed))
    st = np.uint64(stream)
    for r in range(samples.shape[0]):
        h = _splitmix_scalar(_splitmix_scalar(base ^ np.uint64(samples[r])) ^ st)
        for c in range(count):
            z = _splitmix_scalar(h + np.uint64(c) * _GOLDEN)
            out[r, c] = (np.float64(z >> _S11) + 1.0) * _TWO53
    return out


def _fisher_yates_loop(u):
    n = u.shape[0] + 1
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(math.floor(u[i - 1] * (i + 1)))
        if j > i:
            j = i
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    return perm


def _jacobi_loop(a, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(a[i, j]) ** 2
    scale = math.sqrt(scale) + 1e-300
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if math.sqrt(off) <= 1e-15 * scale:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r <= 1e-300:
                    continue
                ph = a[p, q] / r
                alpha = a[p, p].real
                gamma = a[q, q].real
                tau = (gamma - alpha) / (2.0 * r)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                phc = ph.conjugate()
                # columns: A <- A G, G = [[c, s], [-s conj(ph), c conj(ph)]]
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * phc * akq
                    a[k, q] = s * akp + c * phc * akq
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * phc * vkq
                    v[k, q] = s * vkp + c * phc * vkq
                # rows: A <- G^dagger A
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * apk + c * ph * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps


def _apply_gate_loop(mat, gate, offsets, free_bases):
    out = mat.copy()
    g = offsets.shape[0]
    ncol = mat.shape[1]
    buf = np.empty(g, dtype=np.complex128)
    for b in range(free_bases.shape[0]):
        base = free_bases[b]
        for col in range(ncol):
            for t in range(g):
                buf[t] = mat[base + offsets[t], col]
            for s in range(g):
                acc = 0.0 + 0.0j
                for t in range(g):
                    acc += gate[s, t] * buf[t]
                out[base + offsets[s], col] = acc
    return out


def _dh_pairs_loop(a, b, eta):
    n = a.shape[0]
    best = np.inf
    bi = -1
    bj = -1
    for i in range(n):
        if a[i] >= eta:
            val = b[i] / a[i]
            if val < best:
                best = val
                bi = i
                bj = -1
    for i in range(n):
        for j in range(i + 1, n):
            if (a[i] - eta) * (a[j] - eta) < 0.0:
                w = (eta - a[j]) / (a[i] - a[j])
                val = (w * b[i] + (1.0 - w) * b[j]) / eta
                if val < best:
                    best = val
                    bi = i
                    bj = j
    return best, bi, bj


# ---------------------------------------------------------------------------
# Vectorized numpy versions


def _splitmix_vec(x):
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _uniforms_numpy(seed, samples, stream, count):
    with np.errstate(over="ignore"):
        base = _splitmix_vec(np.array([seed], dtype=np.uint64))[0]
        h = _splitmix_vec(_splitmix_vec(base ^ samples.astype(np.uint64)) ^ np.uint64(stream))
        ctr = np.arange(count, dtype=np.uint64) * _GOLDEN
        z = _splitmix_vec(h[:, None] + ctr[None, :])
    return ((z >> _S11).astype(np.float64) + 1.0) * _TWO53


def _fisher_yates_numpy(u):
    n = u.shape[0] + 1
    perm = np.arange(n)
    js = np.minimum(np.floor(u * np.arange(2, n + 1)).astype(np.int64), np.arange(1, n))
    for i in range(n - 1, 0, -1):
        j = js[i - 1]
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _jacobi_numpy(a, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a) + 1e-300
    iu = np.triu_indices(n, 1)
    sweeps = 0
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(np.abs(a[iu]) ** 2)) <= 1e-15 * scale:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r <= 1e-300:
                    continue
                ph = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                phc = ph.conjugate()
                cp, cq = a[:, p].copy(), a[:, q]
                a[:, p] = c * cp - s * phc * cq
                a[:, q] = s * cp + c * phc * cq
                vp, vq = v[:, p].copy(), v[:, q]
                v[:, p] = c * vp - s * phc * vq
                v[:, q] = s * vp + c * phc * vq
                rp, rq = a[p, :].copy(), a[q, :]
                a[p, :] = c * rp - s * ph * rq
                a[q, :] = s * rp + c * ph * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return np.diag(a).real.copy(), v, sweeps


def _apply_gate_numpy(mat, gate, wires, n_wires):
    ncol = mat.shape[1]
    ell = len(wires)
    t = mat.reshape((2,) * n_wires + (ncol,))
    g = gate.reshape((2,) * (2 * ell))
    t = np.tensordot(g, t, axes=(list(range(ell, 2 * ell)), list(wires)))
    t = np.moveaxis(t, list(range(ell)), list(wires))
    return t.reshape(mat.shape)


def _dh_pairs_numpy(a, b, eta):
    n = a.shape[0]
    best, bi, bj = np.inf, -1, -1
    ok = a >= eta
    if ok.any():
        vals = np.where(ok, b / np.where(ok, a, 1.0), np.inf)
        k = int(np.argmin(vals))
        best, bi = float(vals[k]), k
    above = a - eta
    for i in range(n - 1):
        aj, bjs = a[i + 1:], b[i + 1:]
        mask = above[i] * above[i + 1:] < 0.0
        if not mask.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            w = (eta - aj) / (a[i] - aj)
            vals = (w * b[i] + (1.0 - w) * bjs) / eta
        vals = np.where(mask, vals, np.inf)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, bi, bj = float(vals[k]), i, i + 1 + k
    return best, bi, bj


# ---------------------------------------------------------------------------
# Dispatch

if HAS_NUMBA:
    _splitmix_scalar = numba.njit(cache=True)(_splitmix_scalar)
    _uniforms_nb = numba.njit(cache=True)(_uniforms_loop)
    _fisher_yates_nb = numba.njit(cache=True)(_fisher_yates_loop)
    _jacobi_nb = numba.njit(cache=True)(_jacobi_loop)
    _apply_gate_nb = numba.njit(cache=True)(_apply_gate_loop)
    _dh_pairs_nb = numba.njit(cache=True)(_dh_pairs_loop)

_BACKEND = _env_backend()


def backend():
    """Name of the active backend, ``"numba"`` or ``"numpy"``."""
    return _BACKEND


def use_backend(name):
    """Select ``"numba"`` or ``"numpy"``; returns the previous choice."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _BACKEND = _BACKEND, name
    return prev


def counter_uniforms(seed, samples, stream, count):
    """Uniform variates in (0, 1] keyed by (seed, sample index, stream, position).

    Each row depends only on its own key, so any subset of samples can be
    regenerated independently and in any order.
    """
    samples = np.ascontiguousarray(np.atleast_1d(samples), dtype=np.int64)
    if _BACKEND == "numba":
        return _uniforms_nb(np.int64(seed), samples, np.int64(stream), int(count))
    return _uniforms_numpy(seed, samples, stream, int(count))


def fisher_yates(u):
    """Permutation of ``len(u) + 1`` indices driven by the uniforms ``u``."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _BACKEND == "numba":
        return _fisher_yates_nb(u)
    return _fisher_yates_numpy(u)


def jacobi_eigh(a, max_sweeps=60):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Returns unsorted eigenvalues, the eigenvector matrix and the number of
    sweeps used.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if _BACKEND == "numba":
        return _jacobi_nb(a, int(max_sweeps))
    return _jacobi_numpy(a, int(max_sweeps))


def _gate_offsets(wires, n_wires):
    ell = len(wires)
    offsets = np.zeros(2**ell, dtype=np.int64)
    for t in range(2**ell):
        for j, w in enumerate(wires):
            if (t >> (ell - 1 - j)) & 1:
                offsets[t] += 1 << (n_wires - 1 - w)
    mask = sum(1 << (n_wires - 1 - w) for w in wires)
    idx = np.arange(2**n_wires, dtype=np.int64)
    return offsets, idx[(idx & mask) == 0]


def apply_gate(mat, gate, wires, n_wires):
    """Left-multiply ``mat`` (2**n_wires rows) by ``gate`` acting on ``wires``.

    Wire 0 is the most significant bit of the row index.
    """
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    if mat.ndim == 1:
        return apply_gate(mat[:, None], gate, wires, n_wires)[:, 0]
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    if _BACKEND == "numba":
        offsets, bases = _gate_offsets(tuple(wires), n_wires)
        return _apply_gate_nb(mat, gate, offsets, bases)
    return _apply_gate_numpy(mat, gate, tuple(wires), n_wires)


def dh_pair_search(a, b, eta):
    """Minimize the linear-fractional ratio over vertices of the feasible set.

    The feasible set is the probability simplex cut by ``a . w >= eta``; its
    vertices are feasible singletons and boundary points of mixed pairs.
    Returns ``(ratio, i, j)`` with ``j = -1`` for a singleton and ``inf`` when
    nothing is feasible. Ties keep the lowest index in scan order.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if _BACKEND == "numba":
        best, i, j = _dh_pairs_nb(a, b, float(eta))
    else:
        best, i, j = _dh_pairs_numpy(a, b, float(eta))
    return float(best), int(i), int(j)
