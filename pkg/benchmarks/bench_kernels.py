"""Compare the compiled and pure-Python term kernels.

Kernel timings call both modules directly; the pipeline timing runs the
worked example and a spin-3/2 build once per backend in a subprocess, with
GG_PURE_PYTHON selecting the fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from grassmann_gauge import _pykernels
from grassmann_gauge.poly import MASK, S_M1, S_M2, S_P1, S_P2, WIDTH
from grassmann_gauge.scalars import Q

try:
    from grassmann_gauge import _ckernels
except ImportError:
    _ckernels = None

PIPELINE = """
import time
from grassmann_gauge import kernels
from grassmann_gauge.harmonic import build_model
from grassmann_gauge.parser import elaborate_text
from grassmann_gauge.spin3 import build_partial
from grassmann_gauge.verify import EPS2, NILP2, worked_example
t = time.perf_counter()
for _ in range({n}):
    worked_example()
    m = build_model(3, 2, 2, max_degree=40)
    build_partial(elaborate_text("xppm[1]*xppm[2]*N - 3*xppm[2]^2*N", m, NILP2), m, "1partial", omega_E=EPS2)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def random_terms(rng, n_terms, n_vars=8, max_exp=4):
    out = {}
    for _ in range(n_terms):
        key = sum(rng.randint(0, max_exp) << (i * WIDTH) for i in range(n_vars))
        out[key] = Q(rng.randint(-9, 9) or 1, rng.randint(1, 5))
    return out


def bench(label, fn, repeat):
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    return label, best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--terms", type=int, default=200)
    args = ap.parse_args()
    if _ckernels is None:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")

    rng = random.Random(0)
    a, b = random_terms(rng, args.terms), random_terms(rng, args.terms)
    big = _pykernels.mul(a, b)
    reduce_args = (S_P1, S_M2, S_P2, S_M1, MASK)
    cases = {
        "mul": lambda k: k.mul(a, b),
        "add_scaled": lambda k: k.add_scaled(dict(big), big, Q(-1, 2)),
        "reduce_det": lambda k: k.reduce_det(big, *reduce_args),
        "derive": lambda k: k.derive(big, S_P1, MASK, 1 << S_M1),
    }
    print(f"{'kernel':<12} {'python (s)':>12} {'cython (s)':>12} {'speedup':>8}")
    for name, case in cases.items():
        assert case(_pykernels) == case(_ckernels), name
        _, tp = bench(name, lambda: case(_pykernels), args.repeat)
        _, tc = bench(name, lambda: case(_ckernels), args.repeat)
        print(f"{name:<12} {tp:>12.5f} {tc:>12.5f} {tp / tc:>7.2f}x")

    timings = {}
    for pure in ("0", "1"):
        env = dict(os.environ, GG_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", PIPELINE.format(n=3)], env=env,
                             capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        timings[backend] = float(seconds)
    print(f"{'pipelines':<12} {timings['python']:>12.5f} {timings['cython']:>12.5f} "
          f"{timings['python'] / timings['cython']:>7.2f}x")


if __name__ == "__main__":
    main()
