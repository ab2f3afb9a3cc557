#!/usr/bin/env python3
"""Decoder kernel benchmark: numba backend vs pure-numpy fallback.

Builds the extended code, generates noisy frames at a configurable SNR,
and times full decodes through each backend. Run:

    python3 benchmarks/bench_decoder.py [--frames 200] [--snr 2.8]
"""

import argparse
import time

import cvrldpc
from cvrldpc import kernels
from cvrldpc.channel import channel_llr, modulate_bpsk, sigma_from_ebn0
from cvrldpc.codec import DecoderConfig, decode, encode_chunk
from cvrldpc.extension import build_extension
from cvrldpc.matrix import load_base_matrix_file
from cvrldpc.rng import Stream, derive_seed


def make_frames(code, count, snr_db, seed=99):
    sigma = sigma_from_ebn0(snr_db, 0.5)
    frames = []
    for f in range(count):
        st = Stream(derive_seed(seed, 0, f))
        info = st.bits(code.info_length)
        cw = encode_chunk(code, code.max_extension_rows, info[None])[0]
        recv = modulate_bpsk(cw) + sigma * st.gaussians(code.n_full)
        frames.append(channel_llr(recv, sigma))
    return frames


def bench(h, frames, cfg, backend, repeats=1):
    # warm-up triggers JIT compilation so it is not billed to the timing
    decode(h, frames[0], cfg, backend=backend)
    t0 = time.perf_counter()
    iters = 0
    for _ in range(repeats):
        for llr in frames:
            out = decode(h, llr, cfg, backend=backend)
            iters += out.iterations
    dt = time.perf_counter() - t0
    n = repeats * len(frames)
    return dt / n, iters / n


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--snr", type=float, default=2.8)
    ap.add_argument("--max-iter", type=int, default=21)
    args = ap.parse_args()

    mother = load_base_matrix_file(cvrldpc.data_path(cvrldpc.MOTHER_R34A))
    code = build_extension(mother, seed=1)
    h = code.assembled
    frames = make_frames(code, args.frames, args.snr)

    configs = [
        ("oms fixed 6:2", DecoderConfig(max_iterations=args.max_iter)),
        ("oms float", DecoderConfig(max_iterations=args.max_iter, quantization=None)),
        ("sp float", DecoderConfig(max_iterations=args.max_iter, algorithm="sp",
                                   quantization=None)),
    ]
    backends = kernels.available_backends()
    print(f"extended code {h.m}x{h.n}, {h.num_edges} edges, "
          f"{args.frames} frames at {args.snr} dB, max {args.max_iter} iterations")
    print(f"{'config':<15} " + " ".join(f"{b:>14}" for b in backends) + "   speedup")
    for name, cfg in configs:
        times = {}
        for b in backends:
            per_frame, avg_it = bench(h, frames, cfg, b)
            times[b] = per_frame
        cols = " ".join(f"{times[b] * 1e3:>11.3f} ms" for b in backends)
        if "numba" in times and "numpy" in times:
            ratio = f"{times['numpy'] / times['numba']:>8.1f}x"
        else:
            ratio = "     n/a"
        print(f"{name:<15} {cols} {ratio}")


if __name__ == "__main__":
    main()
