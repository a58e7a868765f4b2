"""Compare the numba and numpy plant kernels, then a whole run per backend.

    python3 benchmarks/bench_kernels.py [--sizes 100000,1000000] [--repeat 20]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from tpc import _kernels as K


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(n, rng):
    alpha = rng.random(n)
    u = rng.random(n)
    grad = rng.lognormal(np.log(1e-4), 1.0, n)
    taus = np.geomspace(1e-6, 1e-2, 20)
    return {
        "opacity_step": (lambda: K.np_opacity_step(alpha.copy(), u, 0.05, 0.05, 0.05),
                         lambda: K.nb_opacity_step(alpha.copy(), u, 0.05, 0.05, 0.05)),
        "candidates": (lambda: K.np_candidates(grad, 2e-4), lambda: K.nb_candidates(grad, 2e-4)),
        "compact": (lambda: K.np_compact(alpha, grad, 0.3), lambda: K.nb_compact(alpha, grad, 0.3)),
        "count_ge x20": (lambda: K.np_count_ge(grad, taus), lambda: K.nb_count_ge(grad, taus)),
    }


def full_run(flag):
    code = ("import time; from tpc import run, defaults, RegimeSpec; "
            "run(defaults(), RegimeSpec('tpc'), 0); t=time.perf_counter(); "
            "[run(defaults(target_count=100000), RegimeSpec('tpc'), s) for s in range(5)]; "
            "print(time.perf_counter()-t)")
    env = dict(os.environ, TPC_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="10000,100000,1000000")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not hasattr(K, "nb_opacity_step"):
        sys.exit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    for fns in kernel_cases(16, rng).values():  # compile outside the timings
        fns[1]()
    print(f"{'kernel':<14}{'n':>10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, (np_fn, nb_fn) in kernel_cases(n, rng).items():
            a, b = best_of(np_fn, args.repeat), best_of(nb_fn, args.repeat)
            print(f"{name:<14}{n:>10}{a * 1e3:>12.3f}{b * 1e3:>12.3f}{a / b:>9.2f}x")

    t_np, t_nb = full_run("0"), full_run("1")
    print(f"\n5 TPC runs at K=100000: numpy {t_np:.2f} s, numba {t_nb:.2f} s ({t_np / t_nb:.2f}x)")


if __name__ == "__main__":
    main()
