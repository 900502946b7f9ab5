"""Compare the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_backends.py [--repeat 5]

Prints the best wall time per kernel for each backend and the speedup.
"""
import argparse
import math
import timeit

import numpy as np

from pulsesense import _pycore

try:
    from pulsesense import _core
except ImportError:  # extension not built
    _core = None


def cases(k):
    deltas = np.linspace(-2.0, 2.0, 2001)
    a, b = k.cayley_klein(k.FAMILY_DK, 2.0, 2.0, deltas)
    zs = [complex(x, y) for x in np.linspace(-4.5, 6.0, 40) for y in np.linspace(-3.0, 3.0, 24)]  # no real-axis poles
    return {
        "cgamma x960": lambda: [k.cgamma(z) for z in zs],
        "cayley_klein dk x2001": lambda: k.cayley_klein(k.FAMILY_DK, 2.0, 2.0, deltas),
        "cayley_klein rz x2001": lambda: k.cayley_klein(k.FAMILY_RZ, 1.0, 0.0, deltas),
        "sequence_probability alt N=16": lambda: k.sequence_probability(a, b, 16, True),
        "integrate_family rz": lambda: k.integrate_family(k.FAMILY_RZ, 1.0, 0.0, 0.3, -30.0, 30.0,
                                                          True, 1e-12, 1e-14, 200000),
        "integrate_family rabi": lambda: k.integrate_family(k.FAMILY_RABI, math.pi, 0.0, 0.3, -0.5, 0.5,
                                                            False, 1e-12, 1e-14, 200000),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    py = cases(_pycore)
    cy = cases(_core) if _core is not None else {}
    print(f"{'kernel':32s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in py.items():
        t_py = best(fn, args.repeat) * 1e3
        if name in cy:
            t_cy = best(cy[name], args.repeat) * 1e3
            print(f"{name:32s} {t_py:12.3f} {t_cy:14.3f} {t_py / t_cy:7.1f}x")
        else:
            print(f"{name:32s} {t_py:12.3f} {'n/a':>14s} {'':>8s}")


if __name__ == "__main__":
    main()
