"""Command-line surface: build, simulate, cvr, pipeline.

Exit codes: 0 success, 2 usage error, 3 input parse/format error,
4 structural validation or construction failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

from . import MOTHER_R34A, __version__, data_path, kernels
from .codec import DecoderConfig, Quantization
from .cvr import (
    FULL_ONLY,
    SHORT_FIRST,
    SNR_THRESHOLD,
    PipelineConfig,
    RatePolicy,
    activity_power_proxy,
    latency_comparison,
    throughput_model,
)
from .extension import (
    ConstructionError,
    build_extension,
    load_extended,
    save_extended,
    validate_structure,
)
from .matrix import FormatError, load_base_matrix_file, save_alist
from .sim import SimTarget, StoppingRule, SweepConfig, run_sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_VALIDATION = 4
EXIT_IO = 5


class UsageError(ValueError):
    pass


def _parse_snr_range(spec: str) -> tuple[float, ...]:
    """'start:step:stop' inclusive of both ends when they align, or a
    single value."""
    parts = spec.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad SNR spec {spec!r}") from None
    if len(vals) == 1:
        return (vals[0],)
    if len(vals) != 3:
        raise UsageError("SNR range must be 'start:step:stop'")
    start, step, stop = vals
    if step <= 0:
        raise UsageError("SNR step must be positive")
    if stop < start:
        raise UsageError("SNR stop must be >= start")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return tuple(start + i * step for i in range(count))


def _parse_quant(spec: str) -> Quantization | None:
    if spec.lower() == "float":
        return None
    parts = spec.split(":")
    if len(parts) != 2:
        raise UsageError("quantization must be 'total:frac' or 'float'")
    try:
        total, frac = int(parts[0]), int(parts[1])
        return Quantization(total, frac)
    except ValueError as e:
        raise UsageError(f"bad quantization {spec!r}: {e}") from None


def _parse_int_list(spec: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in spec.split(",") if p != "")
    except ValueError:
        raise UsageError(f"bad integer list {spec!r}") from None


def _decoder_config(args) -> DecoderConfig:
    try:
        return DecoderConfig(
            max_iterations=args.max_iter,
            beta=args.beta,
            algorithm=args.decoder,
            quantization=_parse_quant(args.quant),
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_metadata(out_csv: Path, args, snr_points, code_path: Path):
    meta = {
        "tool": "cvrldpc",
        "version": __version__,
        "created_unix": time.time(),
        "backend": kernels.active_backend_name(),
        "code_file": str(code_path),
        "code_sha256": _sha256(code_path),
        "snr_points": list(snr_points),
        "args": {k: v for k, v in vars(args).items() if k != "func"},
    }
    Path(str(out_csv) + ".meta.json").write_text(
        json.dumps(meta, indent=2, default=str) + "\n", encoding="utf-8"
    )


def _run_sweep_cmd(args, target, policy=None, schedule=None):
    snr_points = _parse_snr_range(args.snr)
    cfg = SweepConfig(
        decoder=_decoder_config(args),
        snr_points=snr_points,
        stopping=StoppingRule(args.min_frame_errors, args.max_frames),
        master_seed=args.seed,
        workers=args.workers,
        rate=args.rate,
        es_n0=args.es_n0,
        policy=policy,
        schedule=schedule,
    )
    out_path = Path(args.out)
    try:
        out = open(out_path, "w", encoding="utf-8", newline="\n")
    except OSError as e:
        print(f"error: cannot open output: {e}", file=sys.stderr)
        return EXIT_IO
    with out:
        run_sweep(target, cfg, out_stream=out,
                  progress=lambda msg: print(msg, flush=True))
    _write_metadata(out_path, args, snr_points, Path(args.code))
    return EXIT_OK


# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    mother = load_base_matrix_file(args.mother)
    code = build_extension(mother, args.seed, args.df_order)
    report = validate_structure(code)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    save_extended(code, f"{prefix}.txt", mother_name=Path(args.mother).name)
    save_alist(code.assembled, f"{prefix}.alist")
    Path(f"{prefix}.report.txt").write_text(report.to_text(), encoding="utf-8")
    print(report.to_text(), end="")
    if not report.passed:
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_simulate(args) -> int:
    base = load_base_matrix_file(args.code)
    target = SimTarget.from_base(base)
    return _run_sweep_cmd(args, target)


def cmd_cvr(args) -> int:
    code = load_extended(args.code)
    try:
        if args.policy == SNR_THRESHOLD:
            policy = RatePolicy.snr_threshold(args.threshold_db, args.window)
        elif args.policy == FULL_ONLY:
            policy = RatePolicy.full_only()
        else:
            policy = RatePolicy.short_first()
    except ValueError as e:
        raise UsageError(str(e)) from None
    schedule = _parse_int_list(args.schedule) if args.schedule else None
    if schedule is not None:
        kmax = code.max_extension_rows
        increasing = all(b > a for a, b in zip(schedule, schedule[1:]))
        if not schedule or not increasing or schedule[0] < 0 or schedule[-1] != kmax:
            raise UsageError(
                f"schedule must be strictly increasing within [0, {kmax}] "
                f"and end at {kmax}"
            )
    target = SimTarget.cvr_engine(code)
    return _run_sweep_cmd(args, target, policy=policy, schedule=schedule)


def cmd_pipeline(args) -> int:
    try:
        p = PipelineConfig(
            clock_hz=args.clock_hz,
            bus_bits=args.bus_bits,
            llr_bits=args.llr_bits,
            n_short=args.n_short,
            n_full=args.n_full,
            frames_in_flight=args.frames_in_flight,
            cycles_per_iteration=args.cycles_per_iteration,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None

    if args.code:
        code = load_extended(args.code)
    else:
        code = build_extension(
            load_base_matrix_file(data_path(MOTHER_R34A)), args.build_seed
        )
    ks = _parse_int_list(args.k) if args.k else (0, code.max_extension_rows // 2,
                                                 code.max_extension_rows)

    lat = latency_comparison(p, args.max_iter)
    rows: list[tuple[str, object]] = []
    for tag, rep in (("short", lat.short), ("full", lat.full)):
        rows += [
            (f"latency.{tag}.frame_bits", rep.frame_bits),
            (f"latency.{tag}.load_cycles", rep.load_cycles),
            (f"latency.{tag}.iteration_cycles", rep.iteration_cycles),
            (f"latency.{tag}.total_cycles", rep.total_cycles),
            (f"latency.{tag}.seconds", f"{rep.seconds:.6g}"),
        ]
    rows += [
        ("latency.load_reduction_pct", f"{100 * lat.load_reduction:.4f}"),
        ("latency.total_reduction_pct", f"{100 * lat.total_reduction:.4f}"),
    ]

    for k in ks:
        a = activity_power_proxy(code, k)
        rows += [
            (f"activity.k{k}.active_cnu", f"{a.active_cnu}/{a.total_cnu}"),
            (f"activity.k{k}.active_vnu", f"{a.active_vnu}/{a.total_vnu}"),
            (f"activity.k{k}.active_edges", f"{a.active_edges}/{a.total_edges}"),
            (f"activity.k{k}.cnu_reduction_pct", f"{100 * a.cnu_reduction:.4f}"),
            (f"activity.k{k}.vnu_reduction_pct", f"{100 * a.vnu_reduction:.4f}"),
            (f"activity.k{k}.edge_reduction_pct", f"{100 * a.edge_reduction:.4f}"),
        ]
    rows.append((
        "activity.external_power_reference",
        "36% (externally reported FPGA power estimate for short-code mode; "
        "reference value only, not derived from this model)",
    ))

    for k in ks:
        t = throughput_model(p, args.avg_iterations, k, args.overhead_cycles)
        rows.append((f"throughput.k{k}.bits_per_second", f"{t.bits_per_second:.6g}"))
        rows.append((f"throughput.k{k}.cycles_per_frame", f"{t.cycles_per_frame:.6g}"))
    rows.append((
        "throughput.external_reference",
        "2.86-3.06 Gbps (externally reported FPGA figures at 80 MHz; "
        "comparison only)",
    ))

    for key, val in rows:
        print(f"{key} = {val}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as f:
            f.write("key,value\n")
            for key, val in rows:
                f.write(f'{key},"{val}"\n')
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_sim_flags(sp):
    sp.add_argument("--snr", required=True,
                    help="SNR spec 'start:step:stop' in dB, or one value")
    sp.add_argument("--decoder", choices=("oms", "sp"), default="oms")
    sp.add_argument("--quant", default="6:2",
                    help="'total:frac' fixed-point split or 'float'")
    sp.add_argument("--max-iter", type=int, default=21)
    sp.add_argument("--beta", type=float, default=0.5)
    sp.add_argument("--min-frame-errors", type=int, default=100)
    sp.add_argument("--max-frames", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--rate", type=float, default=None,
                    help="override the code rate used for the SNR-to-sigma map")
    sp.add_argument("--es-n0", action="store_true",
                    help="read the SNR axis as Es/N0 instead of Eb/N0")
    sp.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cvrldpc",
        description="rate-compatible extended-WiMAX LDPC toolkit",
        epilog="exit codes: 0 ok, 2 usage, 3 parse error, 4 validation "
               "failure, 5 I/O error",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build and validate an extended code")
    b.add_argument("--mother", required=True, help="mother base-matrix file")
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--out", required=True, help="output prefix")
    b.add_argument("--df-order", choices=("d-above-f", "f-above-d"),
                   default="d-above-f")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", help="FER/BER sweep on a base-matrix file")
    s.add_argument("--code", required=True, help="base-matrix file to decode")
    _add_sim_flags(s)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("cvr", help="variable-rate sweep on an extended code")
    c.add_argument("--code", required=True, help="extended-code file (from build)")
    c.add_argument("--policy", choices=(SHORT_FIRST, FULL_ONLY, SNR_THRESHOLD),
                   default=SHORT_FIRST)
    c.add_argument("--threshold-db", type=float, default=3.0)
    c.add_argument("--window", type=int, default=10)
    c.add_argument("--schedule", default="",
                   help="comma-separated extension-row stages, e.g. 0,144,288")
    _add_sim_flags(c)
    c.set_defaults(func=cmd_cvr)

    p = sub.add_parser("pipeline", help="latency / activity / throughput report")
    p.add_argument("--clock-hz", type=float, default=80e6)
    p.add_argument("--bus-bits", type=int, default=256)
    p.add_argument("--llr-bits", type=int, default=6)
    p.add_argument("--n-short", type=int, default=576)
    p.add_argument("--n-full", type=int, default=864)
    p.add_argument("--frames-in-flight", type=int, default=2)
    p.add_argument("--cycles-per-iteration", type=int, default=2)
    p.add_argument("--max-iter", type=int, default=21)
    p.add_argument("--avg-iterations", type=float, default=21.0)
    p.add_argument("--overhead-cycles", type=float, default=0.0)
    p.add_argument("--code", default="", help="extended-code file for edge counts")
    p.add_argument("--build-seed", type=int, default=1,
                   help="seed for the default bundled code when --code is absent")
    p.add_argument("--k", default="", help="extension depths to report")
    p.add_argument("--csv", default="", help="also write a key,value CSV")
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except ConstructionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
