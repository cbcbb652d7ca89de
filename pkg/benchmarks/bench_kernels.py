"""Time the batched per-point kernels on the numba path against the numpy fallback.

    python benchmarks/bench_kernels.py [--points N] [--repeat R]

Both implementations are imported directly, so the comparison does not depend on
PURECONN_NUMBA; that variable only selects which one the library uses. The last
section times one end-to-end call (chiral decomposition of a model at N points)
in subprocesses with PURECONN_NUMBA=1 and =0.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pureconn import models
from pureconn.kernels import _numpy

try:
    from pureconn.kernels import _numba
except ImportError:  # pragma: no cover
    _numba = None

END_TO_END = """
import time, numpy as np
from pureconn import models, curvature as C, kernels
m = models.get_model("cp2-fubini-study")
p = m.sample(np.random.default_rng(0), {n})
jet = models.metric_jet(m, p)
C.chiral_decompose(C.riemann(jet))  # warm-up (jit compilation / caches)
t = time.perf_counter()
for _ in range({r}):
    C.chiral_decompose(C.riemann(jet))
print(kernels.BACKEND, (time.perf_counter() - t) / {r})
"""


def best(fn, repeat):
    fn()  # warm-up, includes jit compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    m = models.get_model("cp2-fubini-study")
    jet = models.metric_jet(m, m.sample(np.random.default_rng(0), args.points))
    cases = {
        "sd_frame": lambda mod: (lambda: mod.sd_frame(jet.g, 1)),
        "christoffel": lambda mod: (lambda: mod.christoffel(jet.g, jet.dg)),
        "riemann": lambda mod: (lambda: mod.riemann(jet.g, jet.dg, jet.ddg)),
    }
    print(f"{args.points} points, best of {args.repeat}")
    print(f"{'kernel':<12}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}{'max |diff|':>12}")
    for name, make in cases.items():
        t_np = best(make(_numpy), args.repeat)
        if _numba is None:
            print(f"{name:<12}{1e3 * t_np:12.2f}{'n/a':>12}")
            continue
        t_nb = best(make(_numba), args.repeat)
        a, b = make(_numpy)(), make(_numba)()
        a, b = (a[0], b[0]) if isinstance(a, tuple) else (a, b)
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:<12}{1e3 * t_np:12.2f}{1e3 * t_nb:12.2f}{t_np / t_nb:10.1f}{diff:12.1e}")

    print("\nend to end (riemann + chiral_decompose), per call:")
    for flag in ("1", "0"):
        env = dict(os.environ, PURECONN_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=args.points, r=args.repeat)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  PURECONN_NUMBA={flag}: backend {out[0]:<6} {1e3 * float(out[1]):8.2f} ms")


if __name__ == "__main__":
    main()
