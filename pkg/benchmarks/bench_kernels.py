"""Benchmark the compiled bitmask kernels against the NumPy fallback.

Times the raw kernels over the full 2^N space and the end-to-end ladder
verification that dominates the oracle's runtime budget.

Usage: python benchmarks/bench_kernels.py [--atoms 10 12 14] [--repeats 20]
"""

import argparse
import time

import numpy as np

from memamp import _kernels
from memamp._kernels import _pure

try:
    from memamp._kernels import _fast
except ImportError:
    _fast = None


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_raw(backends, n_atoms, repeats):
    rng = np.random.default_rng(99)
    size = 1 << n_atoms
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    rows = []
    for name, module in backends:
        t_pop = time_call(lambda m=module: m.popcounts(n_atoms), repeats)
        t_apply = time_call(
            lambda m=module: m.collective_apply(amps, n_atoms, True), repeats
        )
        rows.append((name, t_pop, t_apply))
    return rows


def bench_verify(backends, n_atoms, repeats):
    # verify_ladder reaches the kernels through the package module, so the
    # backend can be swapped by rebinding the apply kernel; the popcount
    # table stays on the shared production cache for both backends
    from memamp import oracle

    rows = []
    saved = _kernels.collective_apply
    try:
        for name, module in backends:
            _kernels.collective_apply = module.collective_apply
            rows.append(
                (name, time_call(lambda: oracle.verify_ladder(n_atoms), repeats))
            )
    finally:
        _kernels.collective_apply = saved
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--atoms", type=int, nargs="+", default=[10, 12, 14])
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    backends = [("numpy", _pure)]
    if _fast is not None:
        backends.insert(0, ("cython", _fast))
    else:
        print("compiled kernels unavailable; timing the fallback only\n")
    print(f"selected backend at import: {_kernels.BACKEND}\n")

    header = f"{'N':>3} {'kernel':<18}" + "".join(
        f"{name:>12}" for name, _ in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for n_atoms in args.atoms:
        raw = bench_raw(backends, n_atoms, args.repeats)
        verify = bench_verify(backends, n_atoms, max(1, args.repeats // 4))
        for label, index in (("popcounts", 1), ("collective_apply", 2)):
            cells = [rows[index] for rows in raw]
            line = f"{n_atoms:>3} {label:<18}" + "".join(
                f"{cell * 1e3:>10.3f}ms" for cell in cells
            )
            if len(cells) == 2:
                line += f"{cells[1] / cells[0]:>9.1f}x"
            print(line)
        cells = [row[1] for row in verify]
        line = f"{n_atoms:>3} {'verify_ladder':<18}" + "".join(
            f"{cell * 1e3:>10.3f}ms" for cell in cells
        )
        if len(cells) == 2:
            line += f"{cells[1] / cells[0]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
