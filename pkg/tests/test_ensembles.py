from math import comb

import numpy as np
import pytest
from scipy.integrate import quad

from ccq.densemath import ValidationError, ptrace
from ccq.ensembles import (
    EnsembleSpec,
    SeededRng,
    cycle_count,
    esd_stats,
    ghse_batch,
    ghse_moment_exact,
    ghse_sample,
    ginibre_reduced,
    haar_pure,
    haar_pure_batch,
    haar_subsystem,
    mp_cdf,
    mp_density,
    nonidentity_cycle_sum,
    tr_sqrt_ratio,
)
from ccq.refentropy import hmin_pure
from ccq.schurweyl import schur_blocks

# Marchenko-Pastur CDF frozen with mpmath quadrature of the density.
MP_FROZEN = {1.0: 0.608997781044229, 2.5: 0.888632845285916, 4.0: 1.0}


def test_reproducible_samples():
    a = haar_pure(16, SeededRng(5), sample=3)
    b = haar_pure(16, SeededRng(5), sample=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, haar_pure(16, SeededRng(5), sample=4))
    batch = haar_pure_batch(16, SeededRng(5), [3, 4])
    assert np.allclose(np.abs(batch[0]), np.abs(a), atol=1e-15)


def test_haar_dim_one_and_norm():
    v = haar_pure(1, SeededRng(1))
    assert np.allclose(v, [1.0])
    assert abs(np.linalg.norm(haar_pure(8, SeededRng(1))) - 1) < 1e-12
    with pytest.raises(ValidationError):
        haar_pure(0, SeededRng(1))


def test_haar_first_moment():
    d, n = 8, 10_000
    v = haar_pure_batch(d, SeededRng(2), np.arange(n))
    p = np.abs(v[:, 0]) ** 2
    se = p.std(ddof=1) / np.sqrt(n)
    assert abs(p.mean() - 1 / d) < 5 * se


def test_haar_second_moment():
    d, n = 3, 20_000
    v = haar_pure_batch(d, SeededRng(3), np.arange(n))
    vv = np.einsum("si,sj->sij", v, v).reshape(n, -1)
    samples = np.einsum("si,sj->sij", vv, vv.conj()).reshape(n, -1)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(n)
    # symmetric projector on two qutrits from (1 + SWAP) / 2
    swap = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            swap[j * 3 + i, i * 3 + j] = 1
    target = ((np.eye(9) + swap) / 2 / comb(d + 1, 2)).reshape(-1)
    err = np.abs(mean - target)
    assert np.all(err <= 5 * se + 1e-12)


def test_ginibre():
    rho = ginibre_reduced(4, 1, SeededRng(4))
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 1
    rho = ginibre_reduced(8, 8, SeededRng(4))
    assert abs(np.trace(rho) - 1) < 1e-12


def test_haar_subsystem():
    rng = SeededRng(5)
    for s in range(5):
        v = haar_subsystem(6, 2, rng, sample=s)
        c = v.reshape(8, 8)
        w = np.linalg.eigvalsh(c @ c.conj().T)[::-1]
        assert np.abs(w[4:]).max() < 1e-10
        assert hmin_pure(v, (8, 8)) >= -2 - 1e-12
    v = haar_subsystem(4, 0, rng)
    assert np.count_nonzero(np.abs(v) > 1e-12) == 1
    with pytest.raises(ValidationError):
        haar_subsystem(2, 3, rng)


def test_ghse_basic():
    rho = ghse_sample(3, 0, SeededRng(6))
    assert abs(np.trace(rho @ rho).real - 1) < 1e-12
    with pytest.raises(ValidationError):
        ghse_sample(12, 10, SeededRng(6))
    with pytest.raises(ValidationError):
        EnsembleSpec("ghse", 12, 10)


def test_ghse_first_moment():
    n = 10_000
    rhos = ghse_batch(4, 2, SeededRng(7), np.arange(n)).reshape(n, -1)
    mean = rhos.mean(axis=0)
    se = rhos.std(axis=0, ddof=1) / np.sqrt(n)
    target = (np.eye(4) / 4).reshape(-1)
    assert np.all(np.abs(mean - target) <= 5 * se + 1e-12)


def test_ghse_matches_ginibre_spectra():
    from scipy.stats import ks_2samp

    rng = SeededRng(8)
    a = np.concatenate([np.linalg.eigvalsh(ghse_sample(4, 4, rng, s)) for s in range(100)])
    b = np.concatenate([np.linalg.eigvalsh(ginibre_reduced(16, 16, rng, s)) for s in range(100)])
    assert ks_2samp(a, b).pvalue > 0.01


def test_mp_cdf_frozen():
    for x, v in MP_FROZEN.items():
        assert abs(mp_cdf(x) - v) < 1e-12
    assert mp_cdf(0.0) == 0.0
    for x in (0.5, 2.0, 3.5):
        val, _ = quad(lambda t: float(mp_density(t)), 0.0, x)
        assert abs(val - mp_cdf(x)) < 1e-7


def test_esd_and_tr_sqrt():
    st = esd_stats(np.eye(16) / 16, 16)
    assert np.allclose(st.scaled, 1)
    assert abs(st.ks - max(MP_FROZEN[1.0], 1 - MP_FROZEN[1.0])) < 1e-12
    assert abs(tr_sqrt_ratio(np.eye(2) / 2, 2) - 1) < 1e-12
    assert abs(tr_sqrt_ratio(np.diag([1.0, 0, 0, 0]), 4) - 0.5) < 1e-12
    maxima = [esd_stats(ginibre_reduced(d, d, SeededRng(9), 0), d).scaled.max() for d in (8, 64)]
    assert abs(maxima[1] - 4) < abs(maxima[0] - 4) + 0.5


def test_cycle_count():
    assert cycle_count((0, 1, 2)) == 3
    assert cycle_count((1, 0, 2)) == 2
    assert cycle_count((1, 2, 0)) == 1


def test_moment_exact_examples():
    assert np.allclose(ghse_moment_exact(4, 3, 1), np.eye(4) / 4)
    m = ghse_moment_exact(2, 2, 2)
    swap = schur_blocks(2).projectors[0] * 2 - np.eye(4)
    assert np.abs(m - (4 * np.eye(4) + 2 * swap) / 20).max() < 1e-12
    for dn, dm, k in [(2, 2, 3), (2, 3, 4), (3, 2, 2)]:
        assert abs(np.trace(ghse_moment_exact(dn, dm, k)) - 1) < 1e-12
    with pytest.raises(ValidationError):
        ghse_moment_exact(2, 2, 7)


def test_moment_partial_trace_consistency():
    m3 = ghse_moment_exact(2, 3, 3)
    m2 = ghse_moment_exact(2, 3, 2)
    assert np.abs(ptrace(m3, (4, 2), (0,)) - m2).max() < 1e-12


@pytest.mark.parametrize("k", range(1, 7))
def test_cycle_identity(k):
    for dm in range(1, 17):
        lhs, rhs = nonidentity_cycle_sum(dm, k)
        assert lhs == rhs
