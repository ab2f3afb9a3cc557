"""Numba implementations of the flooding decoders.

All kernels operate on the CSR views of a parity check matrix:

- ``row_ptr``/``col_idx``: per-check adjacency (column index per edge).
- ``col_ptr``/``col_edge``: per-variable adjacency, where ``col_edge``
  holds indices into the row-major edge array grouped by column.

Messages live in per-edge arrays in row-major edge order. Each iteration
runs every check-node update, then every variable-node update, takes hard
decisions on the posterior (negative LLR means bit 1), and stops early on
a zero syndrome; a pre-iteration syndrome check on the channel signs makes
noiseless frames converge with zero iterations.

``q_step > 0`` selects fixed-point behaviour: every stored message is
rounded to the grid (ties away from zero) and saturated at ``q_lim``.
The posterior itself is accumulated at full width, matching the usual
wide-adder hardware arrangement.
"""

import math

import numpy as np
from numba import njit

# stand-in for an infinite excluded-minimum on degree-1 checks (real codes
# never have them); keeps float arithmetic finite
_FLOAT_CAP = 1e9

# atanh argument clamp; bounds check-node outputs near |19|
_PROD_MAX = 1.0 - 1e-15


@njit(cache=True, nogil=True)
def _quantize_scalar(x, step, lim):
    if x >= 0.0:
        v = math.floor(x / step + 0.5) * step
        return v if v <= lim else lim
    v = -math.floor(-x / step + 0.5) * step
    return v if v >= -lim else -lim


@njit(cache=True, nogil=True)
def syndrome_weight(bits, row_ptr, col_idx):
    m = row_ptr.shape[0] - 1
    w = 0
    for r in range(m):
        p = 0
        for e in range(row_ptr[r], row_ptr[r + 1]):
            p ^= bits[col_idx[e]]
        w += p
    return w


@njit(cache=True, nogil=True)
def decode_oms(llr, row_ptr, col_idx, col_ptr, col_edge, max_iter, beta,
               q_step, q_lim):
    """Offset min-sum flooding decode of one frame.

    Returns (hard uint8[n], iterations used, final syndrome weight).
    """
    m = row_ptr.shape[0] - 1
    n = col_ptr.shape[0] - 1
    num_edges = col_idx.shape[0]

    hard = np.empty(n, dtype=np.uint8)
    for v in range(n):
        hard[v] = 1 if llr[v] < 0.0 else 0
    w = syndrome_weight(hard, row_ptr, col_idx)
    if w == 0:
        return hard, 0, 0

    v2c = np.empty(num_edges, dtype=np.float64)
    c2v = np.empty(num_edges, dtype=np.float64)
    for e in range(num_edges):
        v2c[e] = llr[col_idx[e]]

    for it in range(1, max_iter + 1):
        # check nodes: min / second-min with the receiving edge excluded
        for r in range(m):
            lo = row_ptr[r]
            hi = row_ptr[r + 1]
            if hi == lo:
                continue
            min1 = np.inf
            min2 = np.inf
            imin = -1
            neg = 0
            for e in range(lo, hi):
                x = v2c[e]
                if x < 0.0:
                    neg ^= 1
                    a = -x
                else:
                    a = x
                if a < min1:
                    min2 = min1
                    min1 = a
                    imin = e
                elif a < min2:
                    min2 = a
            for e in range(lo, hi):
                a = min2 if e == imin else min1
                if a > _FLOAT_CAP:
                    a = _FLOAT_CAP
                mag = a - beta
                if mag < 0.0:
                    mag = 0.0
                s = neg
                if v2c[e] < 0.0:
                    s ^= 1
                val = -mag if s == 1 else mag
                if q_step > 0.0:
                    val = _quantize_scalar(val, q_step, q_lim)
                c2v[e] = val

        # variable nodes: posterior, hard decision, extrinsic replies
        for v in range(n):
            lo = col_ptr[v]
            hi = col_ptr[v + 1]
            tot = llr[v]
            for t in range(lo, hi):
                tot += c2v[col_edge[t]]
            hard[v] = 1 if tot < 0.0 else 0
            for t in range(lo, hi):
                e = col_edge[t]
                x = tot - c2v[e]
                if q_step > 0.0:
                    x = _quantize_scalar(x, q_step, q_lim)
                v2c[e] = x

        w = syndrome_weight(hard, row_ptr, col_idx)
        if w == 0:
            return hard, it, 0

    return hard, max_iter, w


@njit(cache=True, nogil=True)
def decode_sp(llr, row_ptr, col_idx, col_ptr, col_edge, max_iter):
    """Sum-product (tanh rule) flooding decode, float only."""
    m = row_ptr.shape[0] - 1
    n = col_ptr.shape[0] - 1
    num_edges = col_idx.shape[0]

    hard = np.empty(n, dtype=np.uint8)
    for v in range(n):
        hard[v] = 1 if llr[v] < 0.0 else 0
    w = syndrome_weight(hard, row_ptr, col_idx)
    if w == 0:
        return hard, 0, 0

    dmax = 0
    for r in range(m):
        d = row_ptr[r + 1] - row_ptr[r]
        if d > dmax:
            dmax = d

    v2c = np.empty(num_edges, dtype=np.float64)
    c2v = np.empty(num_edges, dtype=np.float64)
    tb = np.empty(dmax, dtype=np.float64)
    for e in range(num_edges):
        v2c[e] = llr[col_idx[e]]

    for it in range(1, max_iter + 1):
        for r in range(m):
            lo = row_ptr[r]
            hi = row_ptr[r + 1]
            d = hi - lo
            if d == 0:
                continue
            for i in range(d):
                x = 0.5 * v2c[lo + i]
                if x > 19.0:
                    x = 19.0
                elif x < -19.0:
                    x = -19.0
                tb[i] = math.tanh(x)
            # exclusive prefix products into c2v, suffix folded in reverse
            pre = 1.0
            for i in range(d):
                c2v[lo + i] = pre
                pre *= tb[i]
            suf = 1.0
            for i in range(d - 1, -1, -1):
                p = c2v[lo + i] * suf
                if p > _PROD_MAX:
                    p = _PROD_MAX
                elif p < -_PROD_MAX:
                    p = -_PROD_MAX
                c2v[lo + i] = 2.0 * math.atanh(p)
                suf *= tb[i]

        for v in range(n):
            lo = col_ptr[v]
            hi = col_ptr[v + 1]
            tot = llr[v]
            for t in range(lo, hi):
                tot += c2v[col_edge[t]]
            hard[v] = 1 if tot < 0.0 else 0
            for t in range(lo, hi):
                e = col_edge[t]
                v2c[e] = tot - c2v[e]

        w = syndrome_weight(hard, row_ptr, col_idx)
        if w == 0:
            return hard, it, 0

    return hard, max_iter, w
