"""Pure-numpy fallback decoders, call-compatible with the numba kernels.

Check-node reductions run on a rectangular padded view of the row
adjacency (rows x max-degree) so min / second-min / argmin vectorize;
variable-node updates use segment sums over the column-grouped edge view.
Fixed-point results are bit-identical to the numba backend because every
quantized operation is exact dyadic arithmetic.
"""

import numpy as np

_FLOAT_CAP = 1e9
_PROD_MAX = 1.0 - 1e-15


def _quantize(x, step, lim):
    v = np.floor(np.abs(x) / step + 0.5) * step
    np.minimum(v, lim, out=v)
    return np.copysign(v, x)


def _sum_segments(values, ptr):
    nseg = len(ptr) - 1
    out = np.zeros(nseg, dtype=np.float64)
    if len(values) == 0:
        return out
    nonempty = ptr[:-1] < ptr[1:]
    if not nonempty.any():
        return out
    out[nonempty] = np.add.reduceat(values, ptr[:-1][nonempty])
    return out


def _xor_segments(values, ptr):
    nseg = len(ptr) - 1
    out = np.zeros(nseg, dtype=values.dtype)
    if len(values) == 0:
        return out
    nonempty = ptr[:-1] < ptr[1:]
    if not nonempty.any():
        return out
    out[nonempty] = np.bitwise_xor.reduceat(values, ptr[:-1][nonempty])
    return out


def syndrome_weight(bits, row_ptr, col_idx):
    s = _xor_segments(np.asarray(bits, dtype=np.uint8)[col_idx], row_ptr)
    return int(np.count_nonzero(s))


def _row_geometry(row_ptr, col_idx):
    deg = np.diff(row_ptr)
    m = len(deg)
    edge_row = np.repeat(np.arange(m, dtype=np.int64), deg)
    pos = np.arange(len(col_idx), dtype=np.int64) - np.repeat(row_ptr[:-1], deg)
    dmax = int(deg.max()) if m and len(col_idx) else 0
    return deg, edge_row, pos, dmax


def decode_oms(llr, row_ptr, col_idx, col_ptr, col_edge, max_iter, beta,
               q_step, q_lim):
    hard = (llr < 0.0).astype(np.uint8)
    w = syndrome_weight(hard, row_ptr, col_idx)
    if w == 0:
        return hard, 0, 0

    deg, edge_row, pos, dmax = _row_geometry(row_ptr, col_idx)
    nz_rows = deg > 0
    v2c = llr[col_idx].astype(np.float64)
    rect = np.empty((len(deg), max(dmax, 2)), dtype=np.float64)

    for it in range(1, max_iter + 1):
        sgn = (v2c < 0.0).astype(np.uint8)
        rect.fill(np.inf)
        rect[edge_row, pos] = np.abs(v2c)
        part = np.partition(rect, 1, axis=1)
        min1, min2 = part[:, 0], part[:, 1]
        amin_edge = row_ptr[:-1] + np.argmin(rect, axis=1)

        mag = min1[edge_row]
        mag[amin_edge[nz_rows]] = min2[nz_rows]
        np.minimum(mag, _FLOAT_CAP, out=mag)
        mag -= beta
        np.maximum(mag, 0.0, out=mag)
        flip = _xor_segments(sgn, row_ptr)[edge_row] ^ sgn
        c2v = np.where(flip == 1, -mag, mag)
        if q_step > 0.0:
            c2v = _quantize(c2v, q_step, q_lim)

        post = llr + _sum_segments(c2v[col_edge], col_ptr)
        hard = (post < 0.0).astype(np.uint8)
        v2c = post[col_idx] - c2v
        if q_step > 0.0:
            v2c = _quantize(v2c, q_step, q_lim)

        w = syndrome_weight(hard, row_ptr, col_idx)
        if w == 0:
            return hard, it, 0

    return hard, max_iter, w


def decode_sp(llr, row_ptr, col_idx, col_ptr, col_edge, max_iter):
    hard = (llr < 0.0).astype(np.uint8)
    w = syndrome_weight(hard, row_ptr, col_idx)
    if w == 0:
        return hard, 0, 0

    deg, edge_row, pos, dmax = _row_geometry(row_ptr, col_idx)
    v2c = llr[col_idx].astype(np.float64)
    rect = np.empty((len(deg), max(dmax, 1)), dtype=np.float64)

    for it in range(1, max_iter + 1):
        rect.fill(1.0)
        rect[edge_row, pos] = np.tanh(np.clip(0.5 * v2c, -19.0, 19.0))
        pre = np.cumprod(rect, axis=1)
        suf = np.cumprod(rect[:, ::-1], axis=1)[:, ::-1]
        excl = np.empty_like(rect)
        excl[:, 0] = 1.0
        excl[:, 1:] = pre[:, :-1]
        excl[:, :-1] *= suf[:, 1:]
        prod = np.clip(excl[edge_row, pos], -_PROD_MAX, _PROD_MAX)
        c2v = 2.0 * np.arctanh(prod)

        post = llr + _sum_segments(c2v[col_edge], col_ptr)
        hard = (post < 0.0).astype(np.uint8)
        v2c = post[col_idx] - c2v

        w = syndrome_weight(hard, row_ptr, col_idx)
        if w == 0:
            return hard, it, 0

    return hard, max_iter, w
