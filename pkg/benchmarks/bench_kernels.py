"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--traces 200]

Reports the best-of-N time per kernel on a large synthetic input, then a full
synthesize+decode pass over many traces with each backend swapped in.
"""
import argparse
import time

import numpy as np

from stegsiri import _accel, carriermodel, listener
from stegsiri.carriermodel import ChannelProfile, synthesize_trace
from stegsiri.listener import DecoderParams, decode_trace
from stegsiri.symbolcodec import payload_to_schedule


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation for numba
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(rng):
    n_seg = 20_000
    durs = rng.choice([1.0, 2.0], n_seg)
    ends = np.cumsum(durs)
    starts = ends - durs
    steps = np.where(durs == 1.0, 0.1, 0.25)
    sizes = rng.integers(1, 1500, 1_000_000)
    times = np.sort(rng.uniform(0, 10_000, 1_000_000))
    classes = rng.integers(-1, 2, times.size).astype(np.int64)
    n_bins = 100_001
    voice = rng.integers(0, 3, n_bins).astype(np.float64)
    silence = rng.integers(0, 3, n_bins).astype(np.float64)
    weights = np.array([1.0, 2.0, 1.0])
    kinds = rng.integers(0, 2, n_bins).astype(np.int64)
    return {
        "emit_grid": lambda k: k.emit_grid(starts, ends, steps),
        "classify": lambda k: k.classify(sizes, 800, 900, 100, 700),
        "bin_votes": lambda k: k.bin_votes(times, classes, n_bins, 0.1),
        "pool_votes": lambda k: k.pool_votes(voice, silence, weights),
        "decide_bins": lambda k: k.decide_bins(voice, silence, 0.6),
        "merge_short_runs": lambda k: k.merge_short_runs(kinds, 3),
    }


def pipeline(k, n_traces):
    carriermodel.kernels = listener.kernels = k
    rng = np.random.default_rng(1)
    profile = ChannelProfile(jitter_std_s=0.05, loss_prob=0.05)
    payloads = [rng.integers(0, 256, 16).astype(np.uint8).tobytes() for _ in range(n_traces)]

    def run():
        for seed, p in enumerate(payloads):
            decode_trace(synthesize_trace(payload_to_schedule(p), profile, seed), DecoderParams())
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--traces", type=int, default=200)
    args = ap.parse_args()
    if _accel.numba_kernels is None:
        raise SystemExit("numba is not installed")
    backends = [_accel.numpy_kernels, _accel.numba_kernels]
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, case in kernel_cases(rng).items():
        t_np, t_nb = (best_of(lambda: case(k), args.repeat) for k in backends)
        print(f"{name:<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")
    original = listener.kernels
    try:
        t_np, t_nb = (best_of(pipeline(k, args.traces), max(1, args.repeat // 2)) for k in backends)
    finally:
        carriermodel.kernels = listener.kernels = original
    label = f"e2e x{args.traces}"
    print(f"{label:<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
