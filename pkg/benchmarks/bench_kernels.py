"""Compiled versus pure-Python temporal kernels.

Two measurements:

* each kernel on random 0/1 vectors of a few lengths, both backends in one
  process;
* a whole evaluation workload (random trees, path formulas, counts) run in a
  subprocess per backend, so the evaluator picks its backend at import the
  way it does in production.

Run ``python benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import os
import random
import subprocess
import sys
import timeit

from normlog import _kernels_py

try:
    from normlog._ext import ckernels
except ImportError:
    ckernels = None

LENGTHS = (64, 1024, 16384)
CALLS = {
    "next_forward": 1, "finally_forward": 1, "globally_backward": 1,
    "until_forward": 2, "until_backward": 2, "count_range": 0,
}

WORKLOAD = """
import random, time
from normlog import kernels
from normlog.evaluator import Evaluator
from normlog.model import all_paths
sys_path = {tests!r}
import sys; sys.path.insert(0, sys_path)
from generators import random_model, random_path, random_tau
rng = random.Random(11)
cases = []
for _ in range({trees}):
    m = random_model(rng, 14)
    cases.append((m, random_tau(rng, m), [random_path(rng, 4) for _ in range(4)]))
start = time.perf_counter()
for m, tau, alphas in cases:
    ev = Evaluator(m)
    for sigma in all_paths(m):
        for a in alphas:
            for j in range(len(sigma)):
                ev.path(sigma, j, a, tau)
            ev.count(sigma, 0, len(sigma) - 1, a, tau)
print(kernels.BACKEND, time.perf_counter() - start)
"""


def bench_kernel(impl, name, n, repeat):
    rng = random.Random(n)
    v = bytes(rng.random() < 0.5 for _ in range(n))
    w = bytes(rng.random() < 0.2 for _ in range(n))
    fn = getattr(impl, name)
    if name == "count_range":
        call = lambda: fn(v, 0, n - 1)  # noqa: E731
    elif CALLS[name] == 2:
        call = lambda: fn(v, w)  # noqa: E731
    else:
        call = lambda: fn(v)  # noqa: E731
    number = max(1, 200_000 // n)
    best = min(timeit.repeat(call, number=number, repeat=repeat))
    return best / number * 1e6  # microseconds per call


def run_workload(pure: bool, trees: int) -> tuple[str, float]:
    tests = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests")
    env = {**os.environ, "NORMLOG_PURE": "1" if pure else ""}
    code = WORKLOAD.format(tests=os.path.normpath(tests), trees=trees)
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                          env=env, check=True)
    backend, seconds = proc.stdout.split()
    return backend, float(seconds)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--trees", type=int, default=300)
    args = parser.parse_args(argv)

    if ckernels is None:
        print("compiled kernels are not built; only the pure-Python timings are shown")
    print(f"{'kernel':<20}{'length':>8}{'python us':>12}{'cython us':>12}{'speedup':>9}")
    for name in CALLS:
        for n in LENGTHS:
            py = bench_kernel(_kernels_py, name, n, args.repeat)
            if ckernels is None:
                print(f"{name:<20}{n:>8}{py:>12.2f}{'-':>12}{'-':>9}")
                continue
            cy = bench_kernel(ckernels, name, n, args.repeat)
            print(f"{name:<20}{n:>8}{py:>12.2f}{cy:>12.2f}{py / cy:>8.1f}x")

    print()
    print(f"evaluation workload ({args.trees} random trees, 4 path formulas each):")
    timings = {}
    for pure in (True, False):
        backend, seconds = run_workload(pure, args.trees)
        timings[backend] = seconds
        print(f"  {backend:<8}{seconds:8.3f}s")
    if len(timings) == 2:
        print(f"  speedup {timings['python'] / timings['cython']:.2f}x")


if __name__ == "__main__":
    main()
