"""Compare the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Prints best-of-``repeat`` wall time per kernel and backend, checks that both
backends return identical arrays, and times a full teleportation batch under
each backend in a fresh interpreter (the backend is fixed at import).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from monophoton import _kernels

BATCH_SNIPPET = """
import time
from monophoton import _kernels
from monophoton.protocols import QubitAmplitudes, teleport_batch
teleport_batch(QubitAmplitudes(0.6, 0.8), 1000, 0)
t0 = time.perf_counter()
teleport_batch(QubitAmplitudes(0.6, 0.8), {n}, 7)
print(_kernels.backend(), time.perf_counter() - t0)
"""


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def batch_time(n, disable):
    env = dict(os.environ)
    env.pop("MONOPHOTON_DISABLE_NUMBA", None)
    if disable:
        env["MONOPHOTON_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", BATCH_SNIPPET.format(n=n)], env=env,
                         capture_output=True, text=True, check=True)
    name, seconds = out.stdout.split()
    return name, float(seconds)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=100_000)
    args = ap.parse_args()

    if not _kernels.USE_NUMBA:
        sys.exit("numba backend unavailable or disabled; nothing to compare")

    probs = np.array([0.25, 0.25, 0.125, 0.25, 0.125])
    cdf = np.cumsum(probs)
    seed = 12345
    cases = {
        "stream_uniforms": (
            lambda: _kernels.stream_uniforms_np(seed, 0, args.n),
            lambda: _kernels.stream_uniforms_nb(seed, 0, args.n),
        ),
        "sample_indices": (
            lambda: _kernels.sample_indices_np(cdf, 4, seed, 0, args.n),
            lambda: _kernels.sample_indices_nb(cdf, 4, seed, 0, args.n),
        ),
    }
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}  identical")
    for name, (np_fn, nb_fn) in cases.items():
        same = np.array_equal(np_fn(), nb_fn())
        t_np, t_nb = best_of(np_fn, args.repeat), best_of(nb_fn, args.repeat)
        print(f"{name:<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}  {same}")

    print(f"\nteleport_batch, {args.batch} trials (fresh interpreter per backend)")
    for disable in (True, False):
        name, seconds = batch_time(args.batch, disable)
        print(f"  {name:<6} {seconds:.3f} s")


if __name__ == "__main__":
    main()
