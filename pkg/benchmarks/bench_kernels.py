"""Compare the numba kernels with their numpy twins.

Both backends consume the same pre-drawn buffers, so each case also checks
that the outputs are identical.

    python benchmarks/bench_kernels.py --excursions 20000 --tmax 2000
"""
import argparse
import time

import numpy as np

from crosslab.crossing import Shell, State, XClass
from crosslab.rng import StepStream
from crosslab.walk import WalkKind, simulate_birth_death, simulate_excursions


def _timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_walk(walk, d, t_max, count, repeat):
    targets = [Shell(1), Shell(2), State((1,) * d), XClass((1,) * d)]
    kind = WalkKind.parse(walk)

    def run(use_numba):
        return simulate_excursions(StepStream(1, 0, d), kind, t_max, count, targets,
                                   use_numba=use_numba)

    run(True)  # compile outside the timing
    t_fast, fast = _timed(lambda: run(True), repeat)
    t_slow, slow = _timed(lambda: run(False), repeat)
    same = all(np.array_equal(getattr(fast, f), getattr(slow, f))
               for f in ("status", "length", "tallies"))
    return int(fast.length.sum()), t_fast, t_slow, same


def bench_bd(lambdas, mus, count, repeat):
    def run(use_numba):
        return simulate_birth_death(StepStream(2), lambdas, mus, 100_000, count, 8,
                                    use_numba=use_numba)

    run(True)
    t_fast, fast = _timed(lambda: run(True), repeat)
    t_slow, slow = _timed(lambda: run(False), repeat)
    same = np.array_equal(fast.g, slow.g) and np.array_equal(fast.length, slow.length)
    return int(fast.length.sum()), t_fast, t_slow, same


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--excursions", type=int, default=20_000)
    ap.add_argument("--tmax", type=int, default=2_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'case':28s} {'steps':>11s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s} same")
    cases = [(f"walk {w} d={d}", lambda w=w, d=d: bench_walk(w, d, args.tmax, args.excursions,
                                                              args.repeat))
             for w, d in (("free", 1), ("free", 2), ("reflected", 2), ("box:4", 2),
                          ("free", 3))]
    cases.append(("birth-death constant", lambda: bench_bd([1.0], [1.2], args.excursions * 5,
                                                            args.repeat)))
    cases.append(("birth-death by level", lambda: bench_bd([1.0, 2.0, 0.8], [1.2],
                                                            args.excursions, args.repeat)))
    for name, fn in cases:
        steps, t_fast, t_slow, same = fn()
        print(f"{name:28s} {steps:11d} {t_fast:9.4f} {t_slow:9.4f} "
              f"{t_slow / t_fast:8.1f} {same}")


if __name__ == "__main__":
    main()
