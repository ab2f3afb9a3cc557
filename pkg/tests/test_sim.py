"""Monte Carlo harness: determinism, stopping, accounting, CSV."""

import io

import numpy as np
import pytest

import cvrldpc
from cvrldpc.codec import DecoderConfig
from cvrldpc.cvr import RatePolicy
from cvrldpc.extension import build_extension
from cvrldpc.matrix import BaseMatrix, load_base_matrix_file
from cvrldpc.sim import (
    CSV_HEADER,
    FerPoint,
    SimTarget,
    StoppingRule,
    SweepConfig,
    csv_row,
    run_point,
    run_sweep,
)

MOTHER = load_base_matrix_file(cvrldpc.data_path(cvrldpc.MOTHER_R34A))


@pytest.fixture(scope="module")
def code():
    return build_extension(MOTHER, seed=1)


@pytest.fixture(scope="module")
def mother_target():
    return SimTarget.from_base(MOTHER)


def test_high_snr_noiseless_behaviour(mother_target):
    cfg = SweepConfig(snr_points=(12.0,), stopping=StoppingRule(5, 200), master_seed=3)
    p = run_point(mother_target, cfg, 12.0, 0)
    assert p.frames == 200
    assert p.fer == 0.0 and p.ber == 0.0
    assert p.avg_iterations <= 1.0


def test_very_low_snr_saturates_fer(mother_target):
    cfg = SweepConfig(snr_points=(-10.0,), stopping=StoppingRule(30, 500), master_seed=3)
    p = run_point(mother_target, cfg, -10.0, 0)
    assert p.fer > 0.9
    assert p.frames < 500  # stopping rule fired early


def test_stopping_rule_boundaries(mother_target):
    # min_frame_errors reached exactly: frames stop at the hitting frame
    cfg = SweepConfig(snr_points=(-10.0,), stopping=StoppingRule(3, 500), master_seed=9)
    p = run_point(mother_target, cfg, -10.0, 0)
    assert p.frame_errors == 3
    # max_frames cap wins at high SNR
    cfg = SweepConfig(snr_points=(12.0,), stopping=StoppingRule(3, 50), master_seed=9)
    p = run_point(mother_target, cfg, 12.0, 0)
    assert p.frames == 50 and p.frame_errors < 3


def test_worker_count_does_not_change_results(code):
    target = SimTarget.from_extended(code, 288)
    points = {}
    for workers in (1, 4):
        cfg = SweepConfig(
            decoder=DecoderConfig(),
            snr_points=(2.6,),
            stopping=StoppingRule(25, 3000),
            master_seed=77,
            workers=workers,
        )
        points[workers] = run_point(target, cfg, 2.6, 0)
    a, b = points[1], points[4]
    assert csv_row(a) == csv_row(b)
    assert a.frames == b.frames
    assert a.bit_errors == b.bit_errors
    assert a.iterations_sum == b.iterations_sum


def test_cvr_point_counts_rate_usage(code):
    target = SimTarget.cvr_engine(code)
    cfg = SweepConfig(
        snr_points=(6.0,),
        stopping=StoppingRule(5, 150),
        master_seed=5,
        policy=RatePolicy.short_first(),
        schedule=(0, 144, 288),
    )
    p = run_point(target, cfg, 6.0, 0)
    assert p.avg_rate_used is not None
    assert p.avg_rate_used < 15  # high SNR: short stage almost always enough
    assert p.frames == 150

    cfg_full = SweepConfig(
        snr_points=(6.0,),
        stopping=StoppingRule(5, 100),
        master_seed=5,
        policy=RatePolicy.full_only(),
    )
    p = run_point(target, cfg_full, 6.0, 0)
    assert p.avg_rate_used == 288.0


def test_cvr_threshold_policy_is_worker_invariant(code):
    target = SimTarget.cvr_engine(code)
    rows = []
    for workers in (1, 6):
        cfg = SweepConfig(
            snr_points=(3.5,),
            stopping=StoppingRule(10, 400),
            master_seed=13,
            workers=workers,
            policy=RatePolicy.snr_threshold(3.0, window=8),
        )
        rows.append(csv_row(run_point(target, cfg, 3.5, 0)))
    assert rows[0] == rows[1]


def test_undetected_error_accounting():
    # a code weak enough to hit undetected errors quickly: repetition-2
    h_base = BaseMatrix.from_grid([[0, 0]], z=2)
    target = SimTarget.from_base(h_base)
    cfg = SweepConfig(snr_points=(-2.0,), stopping=StoppingRule(50, 400), master_seed=1)
    p = run_point(target, cfg, -2.0, 0)
    # converged-but-wrong frames exist for this degenerate code and are
    # counted as frame errors
    assert p.undetected_errors > 0
    assert p.frame_errors >= p.undetected_errors
    assert p.codeword_errors >= p.undetected_errors


def test_ferpoint_statistics():
    p = FerPoint(
        snr_db=3.0, frames=1000, bit_errors=50, frame_errors=10,
        iterations_sum=5000, info_length=432, undetected_errors=1,
        codeword_errors=12, bit_errors_sq_sum=500, rate_used_sum=None,
    )
    assert p.ber == pytest.approx(50 / (1000 * 432))
    assert p.fer == pytest.approx(0.01)
    assert p.fer_ci95 == pytest.approx(1.96 * np.sqrt(0.01 * 0.99 / 1000))
    assert p.avg_iterations == 5.0
    assert p.codeword_fer == pytest.approx(0.012)
    assert p.avg_rate_used is None
    assert p.ber_ci95 > 0


def test_csv_format(code):
    p = FerPoint(
        snr_db=3.0, frames=10, bit_errors=4, frame_errors=2,
        iterations_sum=30, info_length=432, undetected_errors=0,
        codeword_errors=2, bit_errors_sq_sum=16, rate_used_sum=None,
    )
    row = csv_row(p)
    assert row.split(",")[0] == "3"
    assert row.count(",") == CSV_HEADER.count(",")
    assert ",," in row  # empty avg_rate_used for plain runs

    p_cvr = FerPoint(
        snr_db=3.0, frames=10, bit_errors=0, frame_errors=0,
        iterations_sum=10, info_length=432, undetected_errors=0,
        codeword_errors=0, bit_errors_sq_sum=0, rate_used_sum=2880.0,
    )
    assert ",288," in csv_row(p_cvr)


def test_run_sweep_incremental_output(mother_target):
    cfg = SweepConfig(
        snr_points=(10.0, 12.0), stopping=StoppingRule(2, 40), master_seed=2
    )
    buf = io.StringIO()
    msgs = []
    points = run_sweep(mother_target, cfg, out_stream=buf, progress=msgs.append)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert len(points) == 2 and len(msgs) == 2
    assert points[0].snr_db == 10.0


def test_run_sweep_empty_range(mother_target):
    cfg = SweepConfig(snr_points=(), stopping=StoppingRule(2, 40), master_seed=2)
    buf = io.StringIO()
    assert run_sweep(mother_target, cfg, out_stream=buf) == []
    assert buf.getvalue().strip() == CSV_HEADER


def test_config_validation():
    with pytest.raises(ValueError):
        StoppingRule(0, 10)
    with pytest.raises(ValueError):
        StoppingRule(10, 0)
    # a cap below the error target is allowed: the cap wins
    StoppingRule(100, 10)
    with pytest.raises(ValueError):
        SweepConfig(workers=0)


def test_fer_non_increasing_in_snr(mother_target):
    cfg = SweepConfig(
        snr_points=(2.0, 4.0, 6.0), stopping=StoppingRule(40, 2500), master_seed=8
    )
    pts = run_sweep(mother_target, cfg)
    for a, b in zip(pts, pts[1:]):
        # allow overlap at the confidence bounds, never a clear inversion
        assert a.fer + a.fer_ci95 >= b.fer - b.fer_ci95


def test_generic_target_info_positions():
    # a non-systematic-friendly matrix still exposes correct info positions
    h_base = BaseMatrix.from_grid([[1, 0, 3], [0, -1, 2]], z=4)
    target = SimTarget.from_base(h_base)
    assert target.info_length == 4
    cfg = SweepConfig(snr_points=(8.0,), stopping=StoppingRule(2, 50), master_seed=4)
    p = run_point(target, cfg, 8.0, 0)
    assert p.frames == 50
