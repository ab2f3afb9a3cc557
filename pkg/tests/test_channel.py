"""Modulation, noise, and LLR mapping."""

import math

import numpy as np
import pytest

from cvrldpc.channel import (
    ChannelConfig,
    apply_awgn,
    channel_llr,
    modulate_bpsk,
    sigma_from_ebn0,
)
from cvrldpc.rng import Stream


def test_modulate_examples():
    assert list(modulate_bpsk([0, 0])) == [1.0, 1.0]
    assert list(modulate_bpsk([1])) == [-1.0]
    assert list(modulate_bpsk([0, 1, 1, 0])) == [1.0, -1.0, -1.0, 1.0]


def test_hard_slice_recovers_bits_at_zero_noise():
    bits = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    sym = apply_awgn(modulate_bpsk(bits), 0.0, Stream(1))
    assert np.array_equal((sym < 0).astype(np.uint8), bits)


def test_awgn_determinism():
    sym = np.zeros(1000)
    a = apply_awgn(sym, 0.7, Stream(5))
    b = apply_awgn(sym, 0.7, Stream(5))
    assert np.array_equal(a, b)


def test_awgn_moments():
    noise = apply_awgn(np.zeros(1_000_000), 1.0, Stream(99))
    assert abs(noise.mean()) < 0.005
    assert abs(noise.var() - 1.0) < 0.01


def test_channel_llr_examples():
    assert channel_llr(np.array([1.0]), math.sqrt(0.5))[0] == pytest.approx(4.0)
    assert channel_llr(np.array([0.0]), 1.0)[0] == 0.0
    assert channel_llr(np.array([-0.5]), 1.0)[0] == pytest.approx(-1.0)


def test_channel_llr_linear_sign_preserving():
    y = np.linspace(-3, 3, 101)
    llr = channel_llr(y, 0.8)
    assert np.array_equal(np.sign(llr), np.sign(y))
    assert np.allclose(channel_llr(2 * y, 0.8), 2 * llr)


def test_sigma_from_ebn0():
    assert sigma_from_ebn0(0.0, 0.5) == pytest.approx(1.0)
    assert sigma_from_ebn0(10 * math.log10(2), 0.5) ** 2 == pytest.approx(0.5)
    assert sigma_from_ebn0(0.0, 1.0) ** 2 == pytest.approx(0.5)
    # Es/N0 reading drops the rate factor
    assert sigma_from_ebn0(3.0, 0.5, es_n0=True) == sigma_from_ebn0(3.0, 1.0)
    with pytest.raises(ValueError):
        sigma_from_ebn0(1.0, 0.0)
    with pytest.raises(ValueError):
        sigma_from_ebn0(1.0, 1.5)


def test_channel_config_invariant():
    cfg = ChannelConfig.from_ebn0(3.0, 0.5, seed=7)
    assert cfg.sigma**2 == pytest.approx(1.0 / (2 * 0.5 * 10 ** 0.3))
