"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 3,10,30,100,300]

Prints one CSV row per (kernel, n, backend) with the best wall time over
``--repeat`` runs, the iteration count, and the speedup over numpy.
"""
import argparse
import sys
import timeit

import numpy as np

from urbancentrality import kernels


def power_case(n, rng):
    M = rng.uniform(0, 1, (n, n)) + np.roll(np.eye(n), 1, axis=1)
    M /= M.sum(axis=1).max()
    return (M, np.full(n, 1.0 / n), 1.0, 1e-12, 100_000)


def balance_case(n, rng):
    S = rng.uniform(0.1, 1, (n, n))
    return (S + S.T, 1.0, np.full(n, 1.0 / n), 1e-12, 100_000)


KERNELS = {"power_iteration": power_case, "balance_iteration": balance_case}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--sizes", default="3,10,30,100,300")
    args = p.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    backends = sorted(kernels.BACKENDS)
    if "cython" not in backends:
        print("note: compiled extension not built; timing numpy only", file=sys.stderr)

    print("kernel,n,backend,seconds,iterations,speedup")
    for name, make in KERNELS.items():
        fn = getattr(kernels, name)
        for n in sizes:
            case = make(n, np.random.default_rng(n))
            times = {}
            for b in backends:
                out = fn(*case, backend=b)
                its = out[2] if name == "power_iteration" else out[1]
                number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*case, backend=b), number=1), 1e-7)))
                t = min(timeit.repeat(lambda: fn(*case, backend=b), number=number, repeat=args.repeat)) / number
                times[b] = (t, its)
            for b in backends:
                t, its = times[b]
                print(f"{name},{n},{b},{t:.3e},{its},{times['python'][0] / t:.2f}")


if __name__ == "__main__":
    main()
