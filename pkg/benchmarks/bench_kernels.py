"""Time the compiled and pure-Python kernels on the same workloads.

    python benchmarks/bench_kernels.py [--repeat 5] [--cutoff 20]

Prints one line per (kernel, backend) with the best wall time and the speedup
of the compiled backend. Results from both backends are cross-checked.
"""
import argparse
import math
import timeit

import numpy as np

from cavion import kernels
from cavion.core import Model, PhysicalParams, build_hamiltonian, make_space


def workloads(cutoff):
    spec = make_space(cutoff, cutoff)
    H = build_hamiltonian(spec, PhysicalParams.effective(), Model.BEAM_SPLITTER).matrix
    rng = np.random.default_rng(0)
    v = rng.normal(size=spec.dim) + 1j * rng.normal(size=spec.dim)
    v /= np.linalg.norm(v)
    norm = float(abs(H).sum(axis=0).max())
    t = math.pi / 4
    nsteps = max(1, math.ceil(norm * t))
    return {
        "expm_action": lambda b: kernels.expm_action(H, v, t / nsteps, nsteps, 1e-14, backend=b)[0],
        "rk4": lambda b: kernels.rk4(H, v, 0.01 / norm, 200, backend=b),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--cutoff", type=int, default=20)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    print(f"cutoff {args.cutoff} (dimension {2 * args.cutoff ** 2}), backends: {', '.join(backends)}")
    for name, fn in workloads(args.cutoff).items():
        results, times = {}, {}
        for b in backends:
            results[b] = fn(b)
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
            print(f"{name:12s} {b:7s} {times[b] * 1e3:10.3f} ms")
        if len(backends) == 2:
            diff = float(np.abs(results["cython"] - results["python"]).max())
            print(f"{name:12s} speedup {times['python'] / times['cython']:8.1f}x  max |difference| {diff:.1e}")


if __name__ == "__main__":
    main()
