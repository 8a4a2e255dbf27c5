"""Compare the two unitary-evolution kernels on one fixed workload.

The sampler can integrate the matrix SDE either with the vectorized numpy
path (all samples in one batched step) or with the numba per-sample path
(compiled loop, one sample at a time).  Both consume the same random
streams, so their outputs agree to floating-point roundoff; this script
reports wall-clock times and the agreement gap.

Run:  python3 benchmarks/kernel_benchmark.py [--N 48] [--samples 200]
"""

import argparse
import time

import numpy as np


def run_once(kernel, N, samples, t, step_count, seed):
    from masterfield import _kernels
    from masterfield.mc import _streams

    if kernel == "numba" and not _kernels.HAS_NUMBA:
        return None, None
    # warm-up pays the jit compilation cost outside the timed region
    _kernels.evolve_unitaries(_streams(seed, 2), N, 0.1, step_count, kernel=kernel)
    gens = _streams(seed, samples)
    t0 = time.perf_counter()
    out = _kernels.evolve_unitaries(gens, N, t, step_count, kernel=kernel)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=48)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    print(f"workload: {args.samples} samples of U({args.N}), "
          f"t={args.t}, {args.steps} steps per unit time")
    results = {}
    for kernel in ("numpy", "numba"):
        elapsed, out = run_once(
            kernel, args.N, args.samples, args.t, args.steps, args.seed
        )
        if elapsed is None:
            print(f"{kernel:>6}: unavailable (numba not installed)")
            continue
        per_step = elapsed / max(1, round(args.steps * args.t))
        print(f"{kernel:>6}: {elapsed:8.3f}s total   {1e3 * per_step:7.2f} ms/step")
        results[kernel] = out

    if len(results) == 2:
        gap = float(np.max(np.abs(results["numpy"] - results["numba"])))
        print(f"max |numpy - numba| = {gap:.3e} "
              f"({'same streams, roundoff only' if gap <= 1e-12 else 'MISMATCH'})")


if __name__ == "__main__":
    main()
