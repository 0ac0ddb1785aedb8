"""Time the compiled core against the numpy fallback.

    python3 benchmarks/bench_core.py [--repeat 5]

Sizes mirror a study cell: N centers, bandwidth from the default schedule,
and a fine evaluation grid like the one used for error integrals.
"""

import argparse
import timeit

import numpy as np

from lpfrontier import _core_py
from lpfrontier.kernel import QUADRIWEIGHT
from lpfrontier.study import StudyConfig, bandwidth_schedule

try:
    from lpfrontier import _core
except ImportError:
    _core = None


def cases(sizes):
    rho_tilde = StudyConfig().rho_tilde
    rng = np.random.default_rng(0)
    for n in sizes:
        h = bandwidth_schedule(n, rho_tilde, 1.0)
        centers = np.sort(rng.random(n))
        w = rng.random(n)
        xs = np.sort(rng.random(20 * n))
        yield n, h, centers, w, xs


def best_of(func, repeat):
    return min(timeit.repeat(func, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 1000, 4000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled core not built; run `pip install -e . --no-build-isolation` first")
        return 1

    coeffs = QUADRIWEIGHT.deriv_coeffs
    print(f"{'kernel':<12}{'N':>6}{'numpy ms':>12}{'cython ms':>12}{'speedup':>10}")
    for n, h, centers, w, xs in cases(args.sizes):
        for name, call in (
            ("window_sums", lambda m: m.window_sums(xs, centers, w, h, coeffs)),
            ("band_matrix", lambda m: m.band_matrix(xs, centers, h, coeffs)),
        ):
            slow = best_of(lambda: call(_core_py), args.repeat)
            fast = best_of(lambda: call(_core), args.repeat)
            print(f"{name:<12}{n:>6}{1e3 * slow:>12.2f}{1e3 * fast:>12.2f}{slow / fast:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
