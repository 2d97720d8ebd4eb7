"""Time the compiled and pure-Python inner loops on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""
import argparse
import time

import numpy as np

from marginlab import _kernels, generate_separable


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick):
    scale = 10 if quick else 1
    d = generate_separable(50, 10, 0.1, 0)
    S, G = d.signed, d.signed @ d.signed.T
    steps = 20_000 // scale
    rec = np.array([steps], dtype=np.intp)
    return [
        ("fw_simplex n=50", lambda b: _kernels.fw_simplex(G, 0, 1e-10, 10**6, backend=b)),
        (f"ascent_loop {steps} steps", lambda b: _kernels.ascent_loop(S, 1.0, _kernels.ADAPTIVE, 1.0, steps, rec, 1e6, backend=b)),
        (f"rk4_loop {steps} steps", lambda b: _kernels.rk4_loop(S, 1.0, 0.05, steps, rec, 1e6, backend=b)),
        (f"dual_ascent_loop {steps} steps", lambda b: _kernels.dual_ascent_loop(G, 1.0, _kernels.ADAPTIVE, 1.0, steps, rec, 1e6, backend=b)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="10x fewer steps")
    args = ap.parse_args()
    names = _kernels.backends()
    print(f"backends available: {', '.join(names)}")
    print(f"{'kernel':<32}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.quick):
        t = {n: best_of(lambda: fn(n), args.repeat) for n in names}
        row = f"{label:<32}" + "".join(f"{t[n]:>11.4f}s" for n in names)
        if len(names) > 1:
            row += f"{t['python'] / t['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
