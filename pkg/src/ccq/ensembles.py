"""Random-state ensembles, spectral statistics and exact GHSE moments."""
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod

import numpy as np

from .densemath import DensityOperator, Ket, ValidationError, dagger, herm_eigvals
from .config import TOL
from .rng import SeededRng
from .schurweyl import permutation_operator

__all__ = [
    "SeededRng", "haar_pure", "haar_pure_batch", "ginibre_reduced", "haar_subsystem", "ghse_sample",
    "ghse_batch", "esd_stats", "mp_cdf", "tr_sqrt_ratio", "ghse_moment_exact", "cycle_count",
    "nonidentity_cycle_sum", "EnsembleSpec",
]


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    m: int = 0
    d_A: int = None

    def __post_init__(self):
        if self.kind not in ("haar_pure", "haar_subsystem", "ghse", "ginibre"):
            raise ValidationError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "ghse" and self.n + self.m > TOL.max_ghse_qubits:
            raise ValidationError("GHSE needs n + m <= 20")
        if self.kind == "haar_subsystem" and not 0 <= self.m <= self.n:
            raise ValidationError("haar_subsystem needs 0 <= m <= n")


def _canonical_phase(v):
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v * (abs(v[k]) / v[k])


def haar_pure(dim, rng, sample=0, stream=0):
    """Haar-random unit vector from normalized complex Gaussians."""
    if dim < 1:
        raise ValidationError("dimension must be positive")
    z = rng.complex_normals(sample, dim, stream)
    return _canonical_phase(z / np.linalg.norm(z))


def haar_pure_batch(dim, rng, samples, stream=0):
    z = rng.complex_normals(np.asarray(samples), dim, stream)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def ginibre_reduced(d_A, d_B, rng, sample=0):
    """G G^dagger / Tr for a d_A x d_B complex Ginibre matrix."""
    g = rng.complex_normals(sample, d_A * d_B, stream=1).reshape(d_A, d_B)
    m = g @ dagger(g)
    return m / np.trace(m).real


def haar_subsystem(n, m, rng, sample=0):
    """U_pi (|0^{n-m}> (x) |phi_m>) with a uniform basis permutation pi.

    The result has Schmidt rank at most 2^m across any cut.
    """
    if not 0 <= m <= n:
        raise ValidationError("need 0 <= m <= n")
    phi = rng.complex_normals(sample, 2**m, stream=2)
    phi = phi / np.linalg.norm(phi)
    perm = rng.permutation(sample, 2**n, stream=3)
    out = np.zeros(2**n, dtype=np.complex128)
    out[perm[: 2**m]] = phi
    return out


def ghse_sample(n, m, rng, sample=0):
    """Reduced state on the first n qubits of a Haar state on n + m qubits."""
    if n + m > TOL.max_ghse_qubits:
        raise ValidationError("GHSE needs n + m <= 20")
    v = haar_pure(2 ** (n + m), rng, sample, stream=4).reshape(2**n, 2**m)
    return v @ dagger(v)


def ghse_batch(d_n, d_m, rng, samples):
    v = haar_pure_batch(d_n * d_m, rng, samples, stream=4).reshape(-1, d_n, d_m)
    return np.einsum("sij,skj->sik", v, v.conj())


def mp_cdf(x):
    """CDF of the Marchenko-Pastur law with ratio 1 on [0, 4]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 4.0)
    th = np.arcsin(np.sqrt(x) / 2.0)
    return (2.0 * th + np.sin(2.0 * th)) / np.pi


def mp_density(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    ok = (x > 0) & (x < 4)
    out[ok] = np.sqrt((4 - x[ok]) / x[ok]) / (2 * np.pi)
    return out


@dataclass(frozen=True)
class EsdStats:
    scaled: np.ndarray
    ks: float
    histogram: tuple


def esd_stats(rho, d_A, bins=16):
    """Scaled spectrum x_i = d_A lambda_i and its KS distance to Marchenko-Pastur."""
    m = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho)
    lam = herm_eigvals(m) if m.shape[0] <= TOL.jacobi_max_dim else np.linalg.eigvalsh(m)[::-1]
    x = np.sort(d_A * np.clip(lam, 0.0, None))
    n = len(x)
    f = mp_cdf(x)
    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    hist, _ = np.histogram(x, bins=bins, range=(0.0, 4.0))
    return EsdStats(x, ks, tuple(int(h) for h in hist))


def tr_sqrt_ratio(rho, d_A):
    """Tr sqrt(rho) / sqrt(d_A); tends to 8 / (3 pi) for square Ginibre states."""
    m = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho)
    lam = herm_eigvals(m) if m.shape[0] <= TOL.jacobi_max_dim else np.linalg.eigvalsh(m)
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))) / np.sqrt(d_A))


def cycle_count(perm):
    seen, cycles = set(), 0
    for i in range(len(perm)):
        if i not in seen:
            cycles += 1
            j = i
            while j not in seen:
                seen.add(j)
                j = perm[j]
    return cycles


def ghse_moment_exact(d_n, d_m, k):
    """E[rho^{(x) k}] for rho = tr_m |psi><psi|, psi Haar on d_n d_m dimensions.

    Equals (d_n d_m - 1)! / (d_n d_m + k - 1)! sum_pi d_m^{cycles(pi)} P_pi.
    """
    if k > 6 or d_n**k > TOL.max_comp_dim:
        raise ValidationError("exact moments need k <= 6 and d_n^k <= 4096")
    d = d_n * d_m
    coeff = Fraction(factorial(d - 1), factorial(d + k - 1))
    out = np.zeros((d_n**k, d_n**k))
    for perm in itertools.permutations(range(k)):
        out += float(coeff * d_m ** cycle_count(perm)) * permutation_operator(perm, d_n)
    return out


def nonidentity_cycle_sum(d_m, k):
    """Return (sum_{pi != id} d_m^{cycles(pi)}, (d_m + k - 1)!/(d_m - 1)! - d_m^k)."""
    lhs = sum(d_m ** cycle_count(p) for p in itertools.permutations(range(k))) - d_m**k
    rhs = factorial(d_m + k - 1) // factorial(d_m - 1) - d_m**k
    return lhs, rhs
