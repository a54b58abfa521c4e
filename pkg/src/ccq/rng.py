"""Counter-based random numbers keyed by (seed, sample index, stream)."""
import numpy as np

from . import kernels


class SeededRng:
    """Stateless generator: every draw is a pure function of its key.

    Parameters
    ----------
    seed : int
        Master seed (non-negative, fits in 63 bits).
    """

    def __init__(self, seed):
        seed = int(seed)
        if seed < 0 or seed >= 2**63:
            raise ValueError("seed must be in [0, 2**63)")
        self.seed = seed

    def uniforms(self, sample, count, stream=0):
        """``count`` uniforms in (0, 1] for one sample index (or an array of them)."""
        scalar = np.isscalar(sample)
        u = kernels.counter_uniforms(self.seed, sample, stream, count)
        return u[0] if scalar else u

    def normals(self, sample, count, stream=0):
        """Standard normals via the Box-Muller transform."""
        scalar = np.isscalar(sample)
        half = (count + 1) // 2
        u = kernels.counter_uniforms(self.seed, sample, stream, 2 * half)
        r = np.sqrt(-2.0 * np.log(u[:, :half]))
        th = 2.0 * np.pi * u[:, half:]
        z = np.concatenate([r * np.cos(th), r * np.sin(th)], axis=1)[:, :count]
        return z[0] if scalar else z

    def complex_normals(self, sample, count, stream=0):
        """Standard complex normals with E|z|^2 = 1."""
        z = self.normals(sample, 2 * count, stream)
        return (z[..., :count] + 1j * z[..., count:]) / np.sqrt(2.0)

    def permutation(self, sample, n, stream=0):
        """Uniform permutation of ``range(n)`` by Fisher-Yates."""
        if n <= 1:
            return np.arange(n)
        return kernels.fisher_yates(self.uniforms(sample, n - 1, stream))
