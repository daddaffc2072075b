"""Compare the compiled and pure-Python Jacobi kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times Hermitian eigendecomposition, singular values and the tensor trace norm
of a 3x3x2 Bloch tensor (the Genuine-entanglement workload) on each backend.
"""
import argparse
import timeit

import numpy as np

from sepcrit import numerics
from sepcrit.bases import get_basis
from sepcrit.bloch import decompose
from sepcrit.states import random_state


def workloads(rng):
    def herm(n):
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return m + m.conj().T

    h8, h24 = herm(8), herm(24)
    a9, a30 = rng.normal(size=(9, 9)) + 0j, rng.normal(size=(30, 20)) + 1j * rng.normal(size=(30, 20))
    dims = (3, 3, 2)
    t = decompose(random_state(dims, seed=1), [get_basis("hw", d) for d in dims]).full
    return {
        "eigh 8x8": lambda: numerics.hermitian_eigen(h8),
        "eigh 24x24": lambda: numerics.hermitian_eigen(h24),
        "svdvals 9x9": lambda: numerics.singular_values(a9),
        "svdvals 30x20": lambda: numerics.singular_values(a30),
        "tensor trace norm 8x8x3": lambda: numerics.tensor_trace_norm(t, workers=1),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = ["python"]
    try:
        from sepcrit import _kernels  # noqa: F401
        backends.insert(0, "compiled")
    except ImportError:
        print("compiled kernels not built; timing the Python fallback only")

    jobs = workloads(np.random.default_rng(0))
    results = {}
    for name in backends:
        previous = numerics.use_backend(name)
        for label, fn in jobs.items():
            number = 20
            best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            results[label, name] = best
        numerics.use_backend(previous)

    header = f"{'workload':26s}" + "".join(f"{b:>14s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label in jobs:
        row = f"{label:26s}" + "".join(f"{results[label, b] * 1e3:12.3f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{results[label, 'python'] / results[label, 'compiled']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
