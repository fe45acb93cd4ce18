"""Compare the compiled eigensolver with the pure-Python fallback.

Usage: python3 benchmarks/bench_eig.py [--sizes 16 64 128 256] [--repeat 3]
"""
import argparse
import time

import numpy as np

from swextrap.densekit import _backend
from swextrap.densekit.linalg import herm_eig


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 128, 256])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    backends = ["python"] + (["compiled"] if _backend.BACKEND == "compiled" else [])
    if len(backends) == 1:
        print("compiled extension not built; timing the fallback only")
    print(f"{'n':>5} " + " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>8} {'residual':>10}")
    for n in args.sizes:
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H = (a + a.conj().T) / 2
        times, resid = {}, 0.0
        for b in backends:
            t, e = best_of(lambda: herm_eig(H, backend=b), args.repeat)
            times[b] = t
            U = e.vectors
            resid = max(resid, float(np.abs(U @ np.diag(e.values) @ U.conj().T - H).max()))
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{n:>5} " + " ".join(f"{times[b]:>11.4f}s" for b in backends) + f" {speed:>8.1f} {resid:>10.2e}")


if __name__ == "__main__":
    main()
