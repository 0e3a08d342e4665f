"""Time the hot kernels under the numba and numpy backends on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Prints one line per kernel with the best-of-repeat time for each backend,
the speed-up and the max absolute difference of the outputs.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from strongkkt import _kernels as K


def inputs(scale: float, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    n_rows = int(200_000 * scale)
    n_pairs, n_lam = int(8_000 * scale), 33
    n_pts, dim = int(400 * scale), 3
    n_iv = int(200_000 * scale)
    lo = rng.normal(size=(n_iv, 2))
    return {
        "strong_margins": (rng.normal(size=n_rows), rng.uniform(0.0, 4.0, n_rows), rng.uniform(0.0, 2.0, n_rows),
                           1.0, 0.5),
        "sq_max_violation": (rng.normal(size=n_pairs), rng.normal(size=n_pairs), rng.normal(size=(n_pairs, n_lam)),
                             rng.uniform(0.0, 4.0, n_pairs), np.linspace(0.0, 1.0, n_lam), 0.5),
        "min_norm_point": (rng.normal(size=(n_pts, dim)) + 2.0,),
        "interval_sum_residuals": (lo, lo + rng.uniform(0.0, 1.0, size=lo.shape)),
    }


def flat(out) -> np.ndarray:
    if isinstance(out, tuple):
        return np.concatenate([np.atleast_1d(np.asarray(o, dtype=float)).ravel() for o in out])
    return np.asarray(out, dtype=float).ravel()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if K._HAVE_NUMBA else [])
    print(f"backends: {', '.join(backends)} (default {K.backend()})")
    for name, a in inputs(args.scale).items():
        fn = getattr(K, name)
        times, outs = {}, {}
        for b in backends:
            with K.use_backend(b):
                outs[b] = flat(fn(*a))  # warm-up also triggers jit compilation
                times[b] = min(timeit.repeat(lambda: fn(*a), number=1, repeat=args.repeat))
        line = f"{name:24s} numpy {times['numpy'] * 1e3:9.2f} ms"
        if "numba" in times:
            diff = float(np.nanmax(np.abs(np.nan_to_num(outs["numba"] - outs["numpy"], posinf=0.0, neginf=0.0))))
            line += (f"   numba {times['numba'] * 1e3:9.2f} ms   speed-up {times['numpy'] / times['numba']:6.2f}x"
                     f"   max |diff| {diff:.1e}")
        print(line)


if __name__ == "__main__":
    main()
