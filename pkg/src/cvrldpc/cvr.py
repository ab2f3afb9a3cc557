"""Variable-rate decoding and the behavioral pipeline models.

``decode_cvr`` tries an increasing schedule of extension-row counts,
decoding the received prefix against the matching sub-matrix and stopping
at the first convergence: the incremental-redundancy decode path. The
pipeline functions are the timing / activity arithmetic of the two-frame
buffered architecture: load cycles from the bus width, activity counts
from the selected sub-matrix.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .codec import DecodeOutcome, DecoderConfig, LlrFrame, decode
from .extension import ExtendedCode

SHORT_FIRST = "short-first"
FULL_ONLY = "full-only"
SNR_THRESHOLD = "snr-threshold"


@dataclass(frozen=True)
class RatePolicy:
    """How the rate controller picks the first decode stage."""

    mode: str = SHORT_FIRST
    threshold_db: float = 3.0
    window: int = 10

    def __post_init__(self):
        if self.mode not in (SHORT_FIRST, FULL_ONLY, SNR_THRESHOLD):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if not math.isfinite(self.threshold_db):
            raise ValueError("threshold_db must be finite")
        if self.window < 1:
            raise ValueError("window length must be >= 1")

    @classmethod
    def short_first(cls) -> "RatePolicy":
        return cls(SHORT_FIRST)

    @classmethod
    def full_only(cls) -> "RatePolicy":
        return cls(FULL_ONLY)

    @classmethod
    def snr_threshold(cls, threshold_db: float = 3.0, window: int = 10) -> "RatePolicy":
        return cls(SNR_THRESHOLD, threshold_db, window)

    @property
    def stateful(self) -> bool:
        return self.mode == SNR_THRESHOLD


class PolicyState:
    """Rolling window of first-attempt outcomes for the threshold policy."""

    def __init__(self, window: int):
        self._window = deque(maxlen=window)

    def record(self, first_attempt_converged: bool):
        self._window.append(bool(first_attempt_converged))

    def all_clear(self) -> bool:
        return all(self._window)  # an empty history counts as clear


@dataclass(frozen=True)
class StageAttempt:
    k: int
    iterations: int
    converged: bool


@dataclass(frozen=True)
class CvrOutcome:
    outcome: DecodeOutcome
    rate_used: int
    attempts: tuple[StageAttempt, ...]

    def __post_init__(self):
        if not self.attempts:
            raise ValueError("attempts must be nonempty")
        ks = [a.k for a in self.attempts]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("attempt k values must be strictly increasing")
        if self.rate_used != self.attempts[-1].k:
            raise ValueError("rate_used must be the last attempted k")


def default_schedule(code: ExtendedCode) -> tuple[int, ...]:
    """Short, intermediate, full: exercises the variable-rate midpoint."""
    return (0, code.max_extension_rows // 2, code.max_extension_rows)


def decode_cvr(
    code: ExtendedCode,
    llr_full: LlrFrame | np.ndarray,
    policy: RatePolicy,
    cfg: DecoderConfig = DecoderConfig(),
    schedule: tuple[int, ...] | None = None,
    snr_db: float | None = None,
    state: PolicyState | None = None,
    backend: str | None = None,
) -> CvrOutcome:
    """Stage through the rate schedule until a stage converges.

    ``llr_full`` must cover all n_full positions; stage k sees only the
    first n_short + k of them. The threshold policy starts at the shortest
    stage when the SNR estimate exceeds the threshold and the recent
    first-attempt history is clean, otherwise it goes straight to the full
    code. Callers own ``state`` updates (see :class:`PolicyState`).
    """
    values = llr_full.values if isinstance(llr_full, LlrFrame) else np.asarray(llr_full)
    if len(values) != code.n_full:
        raise ValueError(f"LLR frame must cover all {code.n_full} positions")
    sched = tuple(schedule) if schedule is not None else default_schedule(code)
    if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError("schedule must be strictly increasing")
    if sched[0] < 0 or sched[-1] != code.max_extension_rows:
        raise ValueError(
            f"schedule must lie in [0, {code.max_extension_rows}] and end at "
            "the full extension"
        )

    if policy.mode == FULL_ONLY:
        stages = sched[-1:]
    elif policy.mode == SHORT_FIRST:
        stages = sched
    else:
        if snr_db is None:
            raise ValueError("threshold policy needs an SNR estimate")
        clean = state.all_clear() if state is not None else True
        stages = sched if (snr_db > policy.threshold_db and clean) else sched[-1:]

    attempts = []
    outcome = None
    for k in stages:
        h = code.rate_matrix(k)
        outcome = decode(h, values[: code.n_short + k], cfg, backend=backend)
        attempts.append(StageAttempt(k, outcome.iterations, outcome.converged))
        if outcome.converged:
            break
    return CvrOutcome(outcome, attempts[-1].k, tuple(attempts))


# ---------------------------------------------------------------------------
# pipeline timing, activity, throughput models


@dataclass(frozen=True)
class PipelineConfig:
    clock_hz: float = 80e6
    bus_bits: int = 256
    llr_bits: int = 6
    n_short: int = 576
    n_full: int = 864
    frames_in_flight: int = 2
    cycles_per_iteration: int = 2

    def __post_init__(self):
        for name in ("clock_hz", "bus_bits", "llr_bits", "n_short", "n_full",
                     "frames_in_flight", "cycles_per_iteration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_short > self.n_full:
            raise ValueError("n_short must not exceed n_full")


@dataclass(frozen=True)
class LatencyReport:
    frame_bits: int
    load_cycles: int
    iteration_cycles: int
    total_cycles: int
    seconds: float


def first_frame_latency(
    p: PipelineConfig, short_first: bool, max_iterations: int = 21
) -> LatencyReport:
    """Cycles until the first frame is decoded: LLR load plus iterations."""
    n = p.n_short if short_first else p.n_full
    load = math.ceil(n * p.llr_bits / p.bus_bits)
    iters = p.cycles_per_iteration * max_iterations
    total = load + iters
    return LatencyReport(n, load, iters, total, total / p.clock_hz)


@dataclass(frozen=True)
class LatencyComparison:
    short: LatencyReport
    full: LatencyReport
    load_reduction: float
    total_reduction: float


def latency_comparison(p: PipelineConfig, max_iterations: int = 21) -> LatencyComparison:
    """Short-first vs full-frame latency.

    The load-component reduction is the bit-volume ratio 1 - n_short/n_full
    (bus-width independent); cycle counts are reported with the actual
    ceiling division.
    """
    short = first_frame_latency(p, True, max_iterations)
    full = first_frame_latency(p, False, max_iterations)
    return LatencyComparison(
        short,
        full,
        1.0 - p.n_short / p.n_full,
        1.0 - short.total_cycles / full.total_cycles,
    )


@dataclass(frozen=True)
class ActivityReport:
    k: int
    active_cnu: int
    total_cnu: int
    active_vnu: int
    total_vnu: int
    active_edges: int
    total_edges: int
    cnu_reduction: float
    vnu_reduction: float
    edge_reduction: float
    # externally reported FPGA power estimate for the short-code mode; a
    # reference value only, not derived from this activity model
    external_power_reference_pct: float = 36.0


def activity_power_proxy(code: ExtendedCode, k: int) -> ActivityReport:
    """Structural switching-activity proxy for decoding at extension depth k.

    Counts the check nodes, variable nodes and edges that stay enabled
    versus the fully extended decoder; per-iteration message updates
    (edges) are the primary proxy for dynamic power.
    """
    if not 0 <= k <= code.max_extension_rows:
        raise ValueError(f"k={k} outside [0, {code.max_extension_rows}]")
    h_k = code.rate_matrix(k)
    h_full = code.assembled
    act_cnu, tot_cnu = h_k.m, h_full.m
    act_vnu, tot_vnu = h_k.n, h_full.n
    act_e, tot_e = h_k.num_edges, h_full.num_edges
    return ActivityReport(
        k, act_cnu, tot_cnu, act_vnu, tot_vnu, act_e, tot_e,
        1.0 - act_cnu / tot_cnu,
        1.0 - act_vnu / tot_vnu,
        1.0 - act_e / tot_e,
    )


@dataclass(frozen=True)
class ThroughputReport:
    bits_per_second: float
    frame_bits: int
    avg_iterations: float
    cycles_per_frame: float
    inputs: dict = field(compare=False)
    # externally reported FPGA figures at 80 MHz (min: short code, max:
    # full code); shown for comparison only, never claimed as outputs
    external_reference_gbps: tuple[float, float] = (2.86, 3.06)


def throughput_model(
    p: PipelineConfig, avg_iterations: float, k: int, overhead_cycles: float = 0.0
) -> ThroughputReport:
    """Decoded bits per second for the pipelined decoder at depth k.

    throughput = frames_in_flight * (n_short + k) * clock
                 / (cycles_per_iteration * avg_iterations + overhead)
    """
    if avg_iterations < 1:
        raise ValueError("avg_iterations must be >= 1")
    if not 0 <= k <= p.n_full - p.n_short:
        raise ValueError(f"k={k} outside [0, {p.n_full - p.n_short}]")
    frame_bits = p.n_short + k
    cyc = p.cycles_per_iteration * avg_iterations + overhead_cycles
    bps = p.frames_in_flight * frame_bits * p.clock_hz / cyc
    return ThroughputReport(
        bps, frame_bits, avg_iterations, cyc,
        {
            "clock_hz": p.clock_hz,
            "frames_in_flight": p.frames_in_flight,
            "cycles_per_iteration": p.cycles_per_iteration,
            "overhead_cycles": overhead_cycles,
        },
    )
