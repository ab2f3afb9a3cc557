"""Systematic encoding and soft-decision decoding.

Encoding is structural: the dual-diagonal parity part of the 802.16e-style
mother code is solved by back-substitution, and each extension parity bit
is the XOR of the mother-codeword bits its check touches (valid because the
extension parity band is an identity). A Gaussian-elimination encoder over
GF(2) backs arbitrary full-rank matrices and doubles as the correctness
oracle for the structured path.

Decoding dispatches to the kernel backend (offset min-sum, or the float
sum-product reference).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .extension import ExtendedCode
from .matrix import (
    BaseMatrix,
    ParityCheckMatrix,
    dual_diagonal_profile,
    expand_base,
    xor_segments,
)


class RankDeficiencyError(ValueError):
    """Matrix has dependent rows; systematic encoding is impossible."""


@dataclass(frozen=True)
class Quantization:
    """Symmetric saturating fixed-point grid for LLR messages."""

    total_bits: int = 6
    frac_bits: int = 2

    def __post_init__(self):
        if self.total_bits < 2:
            raise ValueError("total_bits must be >= 2")
        if not 0 <= self.frac_bits < self.total_bits:
            raise ValueError("frac_bits must lie in [0, total_bits)")

    @property
    def step(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def limit(self) -> float:
        return (2 ** (self.total_bits - 1) - 1) * self.step


def quantize(values, frac_bits: int, total_bits: int = 6):
    """Round to the nearest grid multiple (ties away from zero), saturate.

    Accepts scalars or arrays; the grid is multiples of 2^-frac_bits up to
    +/- (2^(total_bits-1) - 1) * 2^-frac_bits.
    """
    q = Quantization(total_bits, frac_bits)
    x = np.asarray(values, dtype=np.float64)
    v = np.minimum(np.floor(np.abs(x) / q.step + 0.5) * q.step, q.limit)
    out = np.copysign(v, x)
    return float(out) if np.ndim(values) == 0 else out


@dataclass(frozen=True)
class LlrFrame:
    """One frame of per-bit LLRs, floating or on a fixed-point grid."""

    values: np.ndarray
    representation: Quantization | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )
        q = self.representation
        if q is not None:
            v = self.values
            if np.any(np.abs(v) > q.limit):
                raise ValueError("fixed-point LLR outside saturating range")
            if np.any(v / q.step != np.round(v / q.step)):
                raise ValueError("fixed-point LLR not on the grid")

    @property
    def n(self) -> int:
        return len(self.values)

    @classmethod
    def floating(cls, values) -> "LlrFrame":
        return cls(np.asarray(values, dtype=np.float64), None)

    @classmethod
    def quantized(cls, values, q: Quantization = Quantization()) -> "LlrFrame":
        return cls(quantize(values, q.frac_bits, q.total_bits), q)


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 21
    beta: float = 0.5
    algorithm: str = "oms"  # "oms" or "sp"
    quantization: Quantization | None = Quantization()

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.algorithm not in ("oms", "sp"):
            raise ValueError("algorithm must be 'oms' or 'sp'")
        q = self.quantization
        if q is not None and quantize(self.beta, q.frac_bits, q.total_bits) != self.beta:
            raise ValueError("beta must be a multiple of the quantizer step")
        if self.algorithm == "sp" and q is not None:
            raise ValueError("sum-product decoding is float-only")


@dataclass(frozen=True)
class DecodeOutcome:
    bits: np.ndarray
    converged: bool
    iterations: int
    final_syndrome_weight: int

    def __post_init__(self):
        if self.converged != (self.final_syndrome_weight == 0):
            raise ValueError("converged must mirror a zero syndrome")


def decode(
    h: ParityCheckMatrix,
    llr: LlrFrame | np.ndarray,
    cfg: DecoderConfig = DecoderConfig(),
    backend: str | None = None,
) -> DecodeOutcome:
    """Flooding decode of one frame against ``h``."""
    values = llr.values if isinstance(llr, LlrFrame) else np.asarray(llr, np.float64)
    if values.shape != (h.n,):
        raise ValueError(f"LLR length {values.shape} does not match n={h.n}")
    q = cfg.quantization
    if q is not None:
        values = quantize(values, q.frac_bits, q.total_bits)
    kb = kernels.get_backend(backend)
    if cfg.algorithm == "oms":
        hard, iters, w = kb.decode_oms(
            values, h.row_ptr, h.col_idx, h.col_ptr, h.col_edge,
            cfg.max_iterations, float(cfg.beta),
            q.step if q else 0.0, q.limit if q else 0.0,
        )
    else:
        hard, iters, w = kb.decode_sp(
            values, h.row_ptr, h.col_idx, h.col_ptr, h.col_edge,
            cfg.max_iterations,
        )
    return DecodeOutcome(hard, w == 0, int(iters), int(w))


# ---------------------------------------------------------------------------
# node-level update rules (shared math with the kernels, exposed for direct
# use and for oracle tests)


def cn_update_oms(incoming, beta: float, quantization: Quantization | None = None):
    """Offset min-sum check update: per edge, the product of the other
    signs times max(min of the other magnitudes - beta, 0)."""
    inc = np.asarray(incoming, dtype=np.float64)
    a = np.abs(inc)
    neg = (inc < 0.0).astype(np.uint8)
    order = np.argsort(a, kind="stable")
    min1 = a[order[0]]
    min2 = a[order[1]] if len(a) > 1 else np.inf
    excl = np.where(np.arange(len(a)) == order[0], min2, min1)
    mag = np.maximum(np.minimum(excl, 1e9) - beta, 0.0)
    flip = (np.bitwise_xor.reduce(neg) ^ neg).astype(bool)
    out = np.where(flip, -mag, mag)
    if quantization is not None:
        out = quantize(out, quantization.frac_bits, quantization.total_bits)
    return out


def cn_update_sp(incoming):
    """Sum-product check update: 2 atanh of the product of the other
    tanh-halves, with the product clamped just inside +/-1."""
    inc = np.asarray(incoming, dtype=np.float64)
    t = np.tanh(np.clip(0.5 * inc, -19.0, 19.0))
    d = len(t)
    pre = np.concatenate(([1.0], np.cumprod(t)[:-1]))
    suf = np.concatenate((np.cumprod(t[::-1])[-2::-1], [1.0])) if d > 1 else np.ones(1)
    prod = np.clip(pre * suf, -(1.0 - 1e-15), 1.0 - 1e-15)
    return 2.0 * np.arctanh(prod)


def vn_update(channel_llr: float, incoming):
    """Variable update: channel LLR plus the sum of the other messages."""
    inc = np.asarray(incoming, dtype=np.float64)
    return channel_llr + inc.sum() - inc


# ---------------------------------------------------------------------------
# structured (dual-diagonal) mother-code encoder


@dataclass(frozen=True)
class _MotherPlan:
    sigma: int
    r_mid: int
    info_cols: np.ndarray
    info_ptr: np.ndarray


@lru_cache(maxsize=32)
def _mother_plan(base: BaseMatrix) -> _MotherPlan | None:
    dd = dual_diagonal_profile(base)
    if dd is None:
        return None
    h = expand_base(base)
    k1z = (base.cols - base.rows) * base.z
    keep = h.col_idx < k1z
    counts = np.array(
        [int(np.count_nonzero(keep[h.row_ptr[i]:h.row_ptr[i + 1]]))
         for i in range(h.m)],
        dtype=np.int64,
    )
    ptr = np.zeros(h.m + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return _MotherPlan(dd.sigma, dd.r_mid, h.col_idx[keep].copy(), ptr)


def encode_mother_chunk(base: BaseMatrix, info: np.ndarray) -> np.ndarray:
    """Systematically encode a (frames, k) block of info bits against the
    mother base matrix; falls back to Gaussian elimination if the parity
    part is not dual-diagonal."""
    info = np.atleast_2d(np.asarray(info, dtype=np.uint8))
    m1, z = base.rows, base.z
    k1z = (base.cols - m1) * z
    if info.shape[1] != k1z:
        raise ValueError(f"info length {info.shape[1]} != {k1z}")
    plan = _mother_plan(base)
    if plan is None:
        return encode_generic_chunk(expand_base(base), info)
    lam = xor_segments(info[:, plan.info_cols], plan.info_ptr)
    lam = lam.reshape(info.shape[0], m1, z)
    p = np.empty_like(lam)
    p0 = np.bitwise_xor.reduce(lam, axis=1)
    p[:, 0] = p0
    p0s = np.roll(p0, -plan.sigma, axis=1)
    if m1 > 1:
        p[:, 1] = lam[:, 0] ^ p0s
    for i in range(1, m1 - 1):
        p[:, i + 1] = lam[:, i] ^ p[:, i]
        if i == plan.r_mid:
            p[:, i + 1] ^= p0
    return np.concatenate([info, p.reshape(info.shape[0], m1 * z)], axis=1)


# ---------------------------------------------------------------------------
# generic encoder (Gaussian elimination over GF(2), cached per matrix)


@dataclass(frozen=True)
class SystematicForm:
    info_cols: np.ndarray
    parity_cols: np.ndarray
    parity_of_info: np.ndarray  # m x k, parity i = <row i, info> mod 2


def systematic_form(h: ParityCheckMatrix) -> SystematicForm:
    """Reduce ``h`` to systematic form, preferring the trailing columns as
    parity positions so standard layouts keep info bits as a prefix."""
    if h._systematic is not None:
        return h._systematic
    m, n = h.m, h.n
    a = h.to_dense()
    row_of = np.arange(m)
    piv_cols = []
    r = 0
    for col in list(range(n - m, n)) + list(range(n - m)):
        if r == m:
            break
        hits = np.nonzero(a[r:, col])[0]
        if len(hits) == 0:
            continue
        pr = r + hits[0]
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
            row_of[[r, pr]] = row_of[[pr, r]]
        mask = a[:, col].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        piv_cols.append(col)
        r += 1
    if r < m:
        dep = sorted(int(x) for x in row_of[r:])
        raise RankDeficiencyError(
            f"rank {r} < {m}: rows {dep} are dependent on the others"
        )
    parity_cols = np.array(piv_cols, dtype=np.int64)
    info_cols = np.setdiff1d(np.arange(n, dtype=np.int64), parity_cols)
    form = SystematicForm(info_cols, parity_cols, a[:, info_cols])
    h._systematic = form
    return form


def encode_generic_chunk(h: ParityCheckMatrix, info: np.ndarray) -> np.ndarray:
    """Encode against any full-row-rank matrix via the cached systematic
    form; the column permutation back to original order is applied."""
    info = np.atleast_2d(np.asarray(info, dtype=np.uint8))
    form = systematic_form(h)
    if info.shape[1] != len(form.info_cols):
        raise ValueError(
            f"info length {info.shape[1]} != {len(form.info_cols)}"
        )
    cw = np.zeros((info.shape[0], h.n), dtype=np.uint8)
    cw[:, form.info_cols] = info
    # uint8 matmul wraps mod 256, which preserves parity
    par = (info @ form.parity_of_info.T) & 1
    cw[:, form.parity_cols] = par
    return cw


def encode_generic(h: ParityCheckMatrix, info: np.ndarray) -> np.ndarray:
    return encode_generic_chunk(h, info)[0]


# ---------------------------------------------------------------------------
# rate-compatible encoding against an extended code


def _extension_plan(code: ExtendedCode):
    cached = code._caches.get("encode_plan")
    if cached is not None:
        return cached
    h = code.assembled
    m1z = code.m1 * code.z
    n1z = code.n1 * code.z
    cols = []
    ptr = [0]
    for i in range(code.m2 * code.z):
        row = h.row(m1z + i)
        cols.extend(int(c) for c in row if c < n1z)
        ptr.append(len(cols))
    plan = (np.asarray(cols, dtype=np.int64), np.asarray(ptr, dtype=np.int64))
    code._caches["encode_plan"] = plan
    return plan


def encode_chunk(code: ExtendedCode, k: int, info: np.ndarray) -> np.ndarray:
    """Systematic codewords [info | mother parity | first k extension
    parities] for a (frames, info_length) block."""
    if not 0 <= k <= code.max_extension_rows:
        raise ValueError(f"k={k} outside [0, {code.max_extension_rows}]")
    info = np.atleast_2d(np.asarray(info, dtype=np.uint8))
    mother_cw = encode_mother_chunk(code.mother, info)
    if k == 0:
        return mother_cw
    ext_cols, ext_ptr = _extension_plan(code)
    q = xor_segments(mother_cw[:, ext_cols], ext_ptr)
    return np.concatenate([mother_cw, q[:, :k]], axis=1)


def encode(code: ExtendedCode, k: int, info: np.ndarray) -> np.ndarray:
    """Single-frame convenience wrapper around :func:`encode_chunk`."""
    return encode_chunk(code, k, info)[0]
