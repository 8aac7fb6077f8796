"""Compare the compiled and pure-python recurrence kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per case and the speedup of the compiled backend.
"""

import argparse
import timeit

import numpy as np

from isospec import _kernels_py
from isospec.classical import Family, recurrence_coefficients

try:
    from isospec import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def cases():
    for size, nmax in ((100, 8), (2000, 8), (2000, 64), (20000, 16)):
        x = np.linspace(-0.99, 0.99, size)
        coeffs = recurrence_coefficients(Family.legendre(), nmax)
        yield f"three_term  legendre  x={size:<6d} n={nmax}", lambda m, x=x, c=coeffs: m.three_term(x, *c)
    for size, nmax in ((100, 8), (2000, 8), (2000, 40)):
        x = np.linspace(0.05, 30.0, size)
        yield f"bessel_j_seq          x={size:<6d} n={nmax}", lambda m, x=x, n=nmax: m.bessel_j_seq(x, n)


def best(fn, module, repeat):
    timer = timeit.Timer(lambda: fn(module))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not available; build it with `pip install -e . --no-build-isolation`")
    print(f"{'case':<40s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, fn in cases():
        t_py = best(fn, _kernels_py, args.repeat)
        if _compiled is None:
            print(f"{name:<40s} {t_py * 1e3:10.3f}ms {'-':>12s} {'-':>9s}")
            continue
        for a, b in zip(fn(_kernels_py), fn(_compiled)):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)
        t_c = best(fn, _compiled, args.repeat)
        print(f"{name:<40s} {t_py * 1e3:10.3f}ms {t_c * 1e3:10.3f}ms {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
