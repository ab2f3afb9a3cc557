"""BPSK over AWGN: modulation, seeded noise, channel LLRs.

Sign convention: bit 0 maps to +1.0 and a positive received LLR votes for
bit 0, so an all-positive LLR frame is the all-zero word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Stream


def sigma_from_ebn0(ebn0_db: float, rate: float, es_n0: bool = False) -> float:
    """Noise standard deviation for unit-energy BPSK.

    sigma^2 = 1 / (2 R 10^(x/10)); with ``es_n0`` the x-axis is read as
    energy per symbol (R drops out).
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate {rate} outside (0, 1]")
    r = 1.0 if es_n0 else rate
    return math.sqrt(1.0 / (2.0 * r * 10.0 ** (ebn0_db / 10.0)))


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    rate: float
    sigma: float
    seed: int

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float, seed: int,
                  es_n0: bool = False) -> "ChannelConfig":
        return cls(ebn0_db, rate, sigma_from_ebn0(ebn0_db, rate, es_n0), seed)


def modulate_bpsk(bits) -> np.ndarray:
    """bit 0 -> +1.0, bit 1 -> -1.0."""
    b = np.asarray(bits)
    return 1.0 - 2.0 * b.astype(np.float64)


def apply_awgn(symbols, sigma: float, stream: Stream) -> np.ndarray:
    """Add zero-mean Gaussian noise of the given deviation, drawn by
    Box-Muller from the stream (identical stream, identical output)."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    sym = np.asarray(symbols, dtype=np.float64)
    if sigma == 0.0:
        return sym.copy()
    return sym + sigma * stream.gaussians(len(sym))


def channel_llr(received, sigma: float) -> np.ndarray:
    """AWGN LLR: 2 y / sigma^2 (linear and sign-preserving in y)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 2.0 * np.asarray(received, dtype=np.float64) / (sigma * sigma)
