"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two workloads that dominate real runs: split-operator
propagation (FFTs stay in numpy either way; the kernels cover the phase
multiplications and the per-step moment checks) and semiclassical clock
phase accumulation.  Also cross-checks that the two paths agree.

Run:

    python benchmarks/bench_kernels.py [--steps 4000] [--repeats 3]
"""

import argparse
import sys
import time
from pathlib import Path
from statistics import mean, pstdev

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from massclock import (
    GridSpec,
    HamiltonianKind,
    InternalSpace,
    PhysicalParams,
    gaussian_packet,
    make_superposition,
    overlap,
    propagate,
)
from massclock import _kernels


def propagation_workload(steps: int):
    grid = GridSpec(-40.0, 40.0, 2048)
    internal = InternalSpace(E0=100.0, levels=(0.0, 10.0))
    params = PhysicalParams(hbar=1.0, c=10.0, E0=100.0)
    psi = gaussian_packet(grid, 0.0, 1.0, 1.0)
    state = make_superposition(grid, internal, np.full(2, 2**-0.5), psi)
    return lambda: propagate(state, HamiltonianKind.low_energy(), params,
                             5e-4, steps)


def clock_workload(n: int = 200_000):
    t = np.linspace(0.0, 10.0, n)
    omega = 1.0 + 1e-3 * np.sin(t)
    return lambda: _kernels.accumulate_phase(omega, t[1] - t[0])


def time_workload(fn, repeats: int):
    fn()  # warm-up (includes jit compilation on the numba path)
    durations = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        durations.append(time.perf_counter() - t0)
    return durations, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=4000,
                        help="propagation steps per run")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if not _kernels.HAVE_NUMBA:
        print("[info] numba not importable; timing the numpy path only")

    workloads = {
        f"propagation ({args.steps} steps, N=2048, dim=2)":
            propagation_workload(args.steps),
        "clock phase accumulation (2e5 samples)": clock_workload(),
    }

    results = {}
    print(f"{'workload':<45} {'backend':<8} {'mean (s)':>10} {'std (s)':>9}")
    print("-" * 76)
    for label, fn in workloads.items():
        for backend in backends:
            _kernels.set_backend(backend)
            durations, result = time_workload(fn, args.repeats)
            results[(label, backend)] = result
            print(f"{label:<45} {backend:<8} {mean(durations):>10.4f} "
                  f"{pstdev(durations):>9.4f}")

    if len(backends) == 2:
        print()
        for label in workloads:
            a, b = results[(label, "numpy")], results[(label, "numba")]
            if hasattr(a, "amplitudes"):
                gap = abs(abs(overlap(a, b)) - 1.0)
                print(f"agreement [{label}]: |fidelity - 1| = {gap:.3e}")
            else:
                gap = float(np.max(np.abs(a - b)))
                print(f"agreement [{label}]: max |diff| = {gap:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
