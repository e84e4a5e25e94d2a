"""Compare the compiled and pure-Python Jacobi eigensolvers.

Run with ``python3 benchmarks/bench_eigensolver.py [--sizes 4 16 64] [--repeat 3]``.
Also reports numpy's LAPACK ``eigvalsh`` as a reference point.
"""
import argparse
import time

import numpy as np

from embedlab import linalg


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--python-max", type=int, default=64, help="skip the Python backend above this size")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = linalg.available_backends()
    rng = np.random.default_rng(args.seed)
    print(f"backends: {', '.join(backends)}  (selected at import: {linalg.BACKEND})")
    print(f"{'n':>5} " + " ".join(f"{b:>12}" for b in backends) + f" {'numpy':>12} {'speedup':>9} {'max|dw|':>10}")
    for n in args.sizes:
        m = random_hermitian(rng, n)
        ref = np.sort(np.linalg.eigvalsh(m))[::-1]
        times = {}
        err = 0.0
        for b in backends:
            if b == "python" and n > args.python_max:
                continue
            times[b] = best_of(lambda: linalg.eigvalsh(m, backend=b), args.repeat)
            err = max(err, float(np.abs(linalg.eigvalsh(m, backend=b) - ref).max()))
        t_np = best_of(lambda: np.linalg.eigvalsh(m), args.repeat)
        cells = " ".join(f"{times[b] * 1e3:10.3f}ms" if b in times else f"{'-':>12}" for b in backends)
        if {"python", "compiled"} <= times.keys():
            speed = f"{times['python'] / times['compiled']:8.1f}x"
        else:
            speed = f"{'-':>9}"
        print(f"{n:>5} {cells} {t_np * 1e3:10.3f}ms {speed} {err:10.2e}")


if __name__ == "__main__":
    main()
