"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints per-kernel best-of-N wall time for both backends and an end-to-end
``analyze`` run on one synthetic scenario.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from canrev import _purekernels as pure

try:
    from canrev import _ckernels as ck
except ImportError:
    ck = None


def cases(rng):
    n = 30_000
    payload = rng.integers(0, 256, (n, 8)).astype(np.uint8)
    lengths = np.repeat(np.arange(8, 17), 14)[:120]
    anchors = np.where(lengths == 8, np.arange(120) % 8, np.arange(120) % 7)
    msb = (np.arange(120) % 2).astype(np.uint8)
    t_imu = np.arange(60_000) / 100.0
    t_can = np.sort(rng.uniform(0, 600, n))
    y = rng.normal(size=t_imu.shape[0])
    matrix = rng.integers(0, 4096, (120, n)).astype(np.int64)
    target = rng.normal(size=n)
    return {
        "decode_channels (120 x 30k)": lambda k: k.decode_channels(payload, anchors, lengths, msb),
        "nearest_indices (30k into 60k)": lambda k: k.nearest_indices(t_can, t_imu),
        "pearson_rows (120 x 30k)": lambda k: k.pearson_rows(matrix, target),
        "moving_average (60k, 0.25 s)": lambda k: k.moving_average(t_imu, y, 0.25),
        "diff_stdev (30k)": lambda k: k.diff_stdev(matrix[0], 0),
    }


def end_to_end(pure_backend: bool) -> float:
    code = (
        "import time\n"
        "from canrev.synth import default_scenario, generate_recording_set\n"
        "from canrev.pipeline import analyze\n"
        "rset = generate_recording_set(default_scenario(0, duration=600.0))\n"
        "best = min((lambda s: (analyze(rset), time.perf_counter() - s)[1])(time.perf_counter()) for _ in range(3))\n"
        "print(best)\n"
    )
    env = dict(os.environ, CANREV_PURE_PYTHON="1" if pure_backend else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        t_pure = min(timeit.repeat(lambda: fn(pure), number=1, repeat=args.repeat)) * 1e3
        if ck is None:
            print(f"{name:34s} {t_pure:10.2f} {'n/a':>10s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(ck), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:34s} {t_pure:10.2f} {t_c:10.2f} {t_pure / t_c:7.1f}x")
    e_pure = end_to_end(True) * 1e3
    line = f"{'analyze, 10 min trip':34s} {e_pure:10.2f}"
    if ck is not None:
        e_c = end_to_end(False) * 1e3
        line += f" {e_c:10.2f} {e_pure / e_c:7.1f}x"
    print(line)


if __name__ == "__main__":
    main()
