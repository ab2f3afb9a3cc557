"""Seeded Monte Carlo FER/BER sweeps with deterministic parallelism.

Every frame draws from its own substream, derived as (master seed, SNR
index, frame index), so the result of a point is a pure function of the
config and seed: worker count and scheduling cannot change a single counted
error. Frames are processed in index order with a chunked scan for the
stopping rule; chunk frames past the stopping index are computed but
discarded, matching the fixed deterministic frame set.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import channel_llr, modulate_bpsk, sigma_from_ebn0
from .codec import (
    DecoderConfig,
    decode,
    encode_chunk,
    encode_generic_chunk,
    encode_mother_chunk,
    systematic_form,
)
from .cvr import PolicyState, RatePolicy, decode_cvr, default_schedule
from .extension import ExtendedCode
from .matrix import BaseMatrix, ParityCheckMatrix, dual_diagonal_profile, expand_base
from .rng import Stream, derive_seed

_CHUNK = 1024


@dataclass(frozen=True)
class StoppingRule:
    """Stop at min_frame_errors, or at max_frames, whichever comes first.

    max_frames may undercut min_frame_errors; the cap simply wins (useful
    for smoke runs at high SNR).
    """

    min_frame_errors: int = 100
    max_frames: int = 10**6

    def __post_init__(self):
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")


@dataclass(frozen=True)
class SweepConfig:
    decoder: DecoderConfig = DecoderConfig()
    snr_points: tuple[float, ...] = ()
    stopping: StoppingRule = StoppingRule()
    master_seed: int = 0
    workers: int = 1
    rate: float | None = None
    es_n0: bool = False
    policy: RatePolicy | None = None
    schedule: tuple[int, ...] | None = None
    backend: str | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


class SimTarget:
    """What one Monte Carlo frame exercises: encode, corrupt, decode.

    Two flavours: a fixed parity check matrix (plain decode) or an extended
    code driven through the variable-rate engine.
    """

    def __init__(self, h, encode_fn, info_positions, n, code=None):
        self.h = h
        self.encode_chunk = encode_fn
        self.info_positions = np.asarray(info_positions, dtype=np.int64)
        self.n = n
        self.code = code  # set for CVR targets

    @property
    def info_length(self) -> int:
        return len(self.info_positions)

    @property
    def default_rate(self) -> float:
        # incremental-redundancy runs anchor Eb/N0 to the first transmission
        # (the mother code); retransmitted parity adds energy on top
        if self.code is not None:
            return self.info_length / self.code.n_short
        return self.info_length / self.n

    @classmethod
    def from_matrix(cls, h: ParityCheckMatrix) -> "SimTarget":
        form = systematic_form(h)
        return cls(
            h, lambda info: encode_generic_chunk(h, info), form.info_cols, h.n
        )

    @classmethod
    def from_base(cls, base: BaseMatrix) -> "SimTarget":
        h = expand_base(base)
        if dual_diagonal_profile(base) is not None:
            k = (base.cols - base.rows) * base.z
            return cls(
                h, lambda info: encode_mother_chunk(base, info), np.arange(k), h.n
            )
        return cls.from_matrix(h)

    @classmethod
    def from_extended(cls, code: ExtendedCode, k: int) -> "SimTarget":
        h = code.rate_matrix(k)
        return cls(
            h,
            lambda info: encode_chunk(code, k, info),
            np.arange(code.info_length),
            h.n,
        )

    @classmethod
    def cvr_engine(cls, code: ExtendedCode) -> "SimTarget":
        kmax = code.max_extension_rows
        return cls(
            code.assembled,
            lambda info: encode_chunk(code, kmax, info),
            np.arange(code.info_length),
            code.n_full,
            code=code,
        )


@dataclass
class FerPoint:
    """Counts and statistics for one SNR point."""

    snr_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    iterations_sum: int
    info_length: int
    undetected_errors: int
    codeword_errors: int
    bit_errors_sq_sum: int
    rate_used_sum: float | None = None  # CVR runs only

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.info_length)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def fer_ci95(self) -> float:
        # normal approximation; a caveat applies below ~10 frame errors
        f = self.fer
        return 1.96 * math.sqrt(f * (1.0 - f) / self.frames)

    @property
    def ber_ci95(self) -> float:
        """Cluster-robust BER half-width: frames are the independent unit,
        so the variance comes from per-frame bit-error counts."""
        f = self.frames
        if f < 2:
            return float("nan")
        mean = self.bit_errors / f
        var = (self.bit_errors_sq_sum - f * mean * mean) / (f - 1)
        return 1.96 * math.sqrt(max(var, 0.0) / f) / self.info_length

    @property
    def avg_iterations(self) -> float:
        return self.iterations_sum / self.frames

    @property
    def avg_rate_used(self) -> float | None:
        if self.rate_used_sum is None:
            return None
        return self.rate_used_sum / self.frames

    @property
    def codeword_fer(self) -> float:
        return self.codeword_errors / self.frames


CSV_HEADER = (
    "snr_db,frames,bit_errors,frame_errors,ber,fer,fer_ci95,"
    "avg_iterations,avg_rate_used,undetected_errors,codeword_fer"
)


def csv_row(p: FerPoint) -> str:
    rate_used = "" if p.avg_rate_used is None else f"{p.avg_rate_used:.6g}"
    return (
        f"{p.snr_db:.6g},{p.frames},{p.bit_errors},{p.frame_errors},"
        f"{p.ber:.8g},{p.fer:.8g},{p.fer_ci95:.8g},{p.avg_iterations:.6g},"
        f"{rate_used},{p.undetected_errors},{p.codeword_fer:.8g}"
    )


class _ChunkResult:
    __slots__ = ("bit_err", "frame_err", "iters", "undet", "cw_err", "rate_used")

    def __init__(self, count):
        self.bit_err = np.zeros(count, dtype=np.int64)
        self.frame_err = np.zeros(count, dtype=np.uint8)
        self.iters = np.zeros(count, dtype=np.int64)
        self.undet = np.zeros(count, dtype=np.uint8)
        self.cw_err = np.zeros(count, dtype=np.uint8)
        self.rate_used = np.zeros(count, dtype=np.int64)


def _decode_one_plain(target, cfg, llr_values):
    out = decode(target.h, llr_values, cfg.decoder, backend=cfg.backend)
    return out, out.iterations, 0


def _decode_one_cvr(target, cfg, llr_values, snr_db, state):
    sched = cfg.schedule if cfg.schedule is not None else default_schedule(target.code)
    res = decode_cvr(
        target.code, llr_values, cfg.policy, cfg.decoder,
        schedule=sched, snr_db=snr_db, state=state, backend=cfg.backend,
    )
    if state is not None:
        state.record(res.attempts[0].converged)
    total_iters = sum(a.iterations for a in res.attempts)
    return res.outcome, total_iters, res.rate_used


def _run_chunk(target, cfg, sigma, snr_db, snr_index, start, count, state):
    is_cvr = target.code is not None
    streams = [
        Stream(derive_seed(cfg.master_seed, snr_index, i))
        for i in range(start, start + count)
    ]
    info = np.stack([st.bits(target.info_length) for st in streams])
    cw = target.encode_chunk(info)
    symbols = modulate_bpsk(cw)
    res = _ChunkResult(count)

    def work(lo, hi):
        for j in range(lo, hi):
            recv = symbols[j] + sigma * streams[j].gaussians(target.n)
            llr = channel_llr(recv, sigma)
            if is_cvr:
                out, iters, k_used = _decode_one_cvr(target, cfg, llr, snr_db, state)
                n_used = target.code.n_short + k_used
            else:
                out, iters, k_used = _decode_one_plain(target, cfg, llr)
                n_used = target.n
            errs = int(np.count_nonzero(out.bits[target.info_positions] != info[j]))
            res.bit_err[j] = errs
            res.frame_err[j] = 1 if (errs > 0 or not out.converged) else 0
            res.undet[j] = 1 if (out.converged and errs > 0) else 0
            res.cw_err[j] = 0 if np.array_equal(out.bits, cw[j, :n_used]) else 1
            res.iters[j] = iters
            res.rate_used[j] = k_used

    sequential = cfg.workers == 1 or (is_cvr and cfg.policy.stateful)
    if sequential:
        work(0, count)
    else:
        bounds = np.linspace(0, count, cfg.workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            list(ex.map(lambda b: work(*b), zip(bounds[:-1], bounds[1:])))
    return res


def run_point(target: SimTarget, cfg: SweepConfig, snr_db: float,
              snr_index: int) -> FerPoint:
    """Monte Carlo at one SNR until the stopping rule fires."""
    rate = cfg.rate if cfg.rate is not None else target.default_rate
    sigma = sigma_from_ebn0(snr_db, rate, cfg.es_n0)
    is_cvr = target.code is not None
    state = (
        PolicyState(cfg.policy.window)
        if is_cvr and cfg.policy.stateful
        else None
    )
    stop = cfg.stopping

    frames = 0
    bit_errors = 0
    frame_errors = 0
    iters_sum = 0
    undetected = 0
    cw_errors = 0
    sq_sum = 0
    rate_sum = 0

    while frames < stop.max_frames and frame_errors < stop.min_frame_errors:
        count = min(_CHUNK, stop.max_frames - frames)
        res = _run_chunk(target, cfg, sigma, snr_db, snr_index, frames, count, state)
        take = count
        cum = frame_errors + np.cumsum(res.frame_err.astype(np.int64))
        hit = np.nonzero(cum >= stop.min_frame_errors)[0]
        if len(hit):
            take = int(hit[0]) + 1
        frames += take
        bit_errors += int(res.bit_err[:take].sum())
        frame_errors += int(res.frame_err[:take].sum())
        iters_sum += int(res.iters[:take].sum())
        undetected += int(res.undet[:take].sum())
        cw_errors += int(res.cw_err[:take].sum())
        sq_sum += int((res.bit_err[:take].astype(np.int64) ** 2).sum())
        rate_sum += int(res.rate_used[:take].sum())

    return FerPoint(
        snr_db=snr_db,
        frames=frames,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        iterations_sum=iters_sum,
        info_length=target.info_length,
        undetected_errors=undetected,
        codeword_errors=cw_errors,
        bit_errors_sq_sum=sq_sum,
        rate_used_sum=float(rate_sum) if is_cvr else None,
    )


def run_sweep(
    target: SimTarget,
    cfg: SweepConfig,
    out_stream=None,
    progress=None,
) -> list[FerPoint]:
    """Run every SNR point in ascending index order.

    When ``out_stream`` is given, the CSV header and one row per completed
    point are written and flushed incrementally, so an interrupted sweep
    keeps its finished points.
    """
    points = []
    if out_stream is not None:
        out_stream.write(CSV_HEADER + "\n")
        out_stream.flush()
    for idx, snr_db in enumerate(cfg.snr_points):
        p = run_point(target, cfg, snr_db, idx)
        points.append(p)
        if out_stream is not None:
            out_stream.write(csv_row(p) + "\n")
            out_stream.flush()
        if progress is not None:
            progress(
                f"snr={snr_db:.3g} dB  frames={p.frames}  fer={p.fer:.3g}  "
                f"ber={p.ber:.3g}  avg_iter={p.avg_iterations:.3g}"
            )
    return points
