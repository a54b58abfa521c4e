"""Compare the numba and numpy backends of the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
warmed up once per backend (this triggers numba compilation), then timed as
the best of ``--repeat`` runs. Outputs of the two backends are compared too.
"""
import argparse
import time

import numpy as np

from ccq import kernels
from ccq.circuits import LIBRARY


def cases():
    rng = np.random.default_rng(0)
    herm = rng.normal(size=(48, 48)) + 1j * rng.normal(size=(48, 48))
    herm = herm + herm.conj().T
    state = rng.normal(size=(2**12, 8)) + 1j * rng.normal(size=(2**12, 8))
    cnot = LIBRARY["CNOT"]
    a = rng.uniform(size=3000)
    b = rng.uniform(size=3000)
    u = kernels.counter_uniforms(1, [0], 0, 2**16 - 1)[0]
    return {
        "counter_uniforms 2000x256": lambda: kernels.counter_uniforms(7, np.arange(2000), 3, 256),
        "fisher_yates 65536": lambda: kernels.fisher_yates(u),
        "jacobi_eigh 48x48": lambda: kernels.jacobi_eigh(herm)[0],
        "apply_gate CNOT on 12 wires": lambda: kernels.apply_gate(state, cnot, (3, 9), 12),
        "dh_pair_search 3000": lambda: np.array(kernels.dh_pair_search(a, b, 0.7)),
    }


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def agree(x, y):
    if x.dtype.kind in "iu":
        return np.array_equal(x, y)
    if x.ndim == 1 and x.dtype.kind == "f" and x.size > 3:
        x, y = np.sort(x), np.sort(y)
    return np.allclose(x, y, atol=1e-9)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not kernels.HAS_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return
    prev = kernels.backend()
    print(f"{'kernel':32s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}  outputs")
    for name, fn in cases().items():
        row, outs = {}, {}
        for be in ("numba", "numpy"):
            kernels.use_backend(be)
            outs[be] = np.asarray(fn())
            row[be] = best_time(fn, args.repeat)
        same = "match" if agree(outs["numba"], outs["numpy"]) else "DIFFER"
        print(f"{name:32s} {1e3 * row['numba']:11.3f} {1e3 * row['numpy']:11.3f} "
              f"{row['numpy'] / row['numba']:8.1f}  {same}")
    kernels.use_backend(prev)


if __name__ == "__main__":
    main()
