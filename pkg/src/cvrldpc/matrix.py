"""Parity check matrices: quasi-cyclic base grids, expansion, syndromes,
and the two interchange file formats (base-matrix text and alist).

A quasi-cyclic code is described by a small grid of circulant shift values
(`BaseMatrix`); expansion replaces each entry by a z x z circulant with a 1
at (r, (r + shift) mod z), or a zero block for null entries. The expanded
`ParityCheckMatrix` stores the Tanner graph as row/column adjacency in CSR
form, which is the shape every decoder and encoder operation needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, TextIO

import numpy as np

NULL_BLOCK = -1


class FormatError(ValueError):
    """Malformed base-matrix or alist input; message carries line/column."""


@dataclass(frozen=True)
class BaseMatrix:
    """Grid of circulant shift indices defining a QC code before expansion.

    ``entries[i][j]`` is either ``NULL_BLOCK`` (-1) or a shift in [0, z).
    """

    rows: int
    cols: int
    z: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.z < 1:
            raise ValueError("rows, cols and z must all be >= 1")
        if len(self.entries) != self.rows:
            raise ValueError("entry grid has wrong row count")
        for i, row in enumerate(self.entries):
            if len(row) != self.cols:
                raise ValueError(f"entry row {i} has wrong length")
            for j, e in enumerate(row):
                if e != NULL_BLOCK and not 0 <= e < self.z:
                    raise ValueError(
                        f"shift {e} at ({i}, {j}) outside [0, {self.z})"
                    )

    @classmethod
    def from_grid(cls, grid: Iterable[Iterable[int]], z: int) -> "BaseMatrix":
        entries = tuple(tuple(int(e) for e in row) for row in grid)
        return cls(len(entries), len(entries[0]) if entries else 0, z, entries)

    @property
    def nonnull_count(self) -> int:
        return sum(e != NULL_BLOCK for row in self.entries for e in row)

    def to_text(self, header_comments: Iterable[str] = ()) -> str:
        lines = [f"# {c}" if not c.startswith("#") else c for c in header_comments]
        lines.append(f"{self.rows} {self.cols} {self.z}")
        for row in self.entries:
            lines.append(" ".join(str(e) for e in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Syndrome:
    bits: np.ndarray
    weight: int


class ParityCheckMatrix:
    """Sparse binary m x n matrix with transpose-consistent adjacency.

    Rows are check nodes, columns variable nodes. Stored as CSR over rows
    (``row_ptr``/``col_idx``) plus the column-major view (``col_ptr``/
    ``col_edge``), where ``col_edge`` holds indices into the row-major edge
    array grouped by column. Instances are immutable after construction and
    safe to share across workers.
    """

    def __init__(self, m: int, n: int, row_adj: Iterable[Iterable[int]]):
        rows = [np.asarray(sorted(r), dtype=np.int64) for r in row_adj]
        if len(rows) != m:
            raise ValueError("row_adj has wrong row count")
        deg = np.array([len(r) for r in rows], dtype=np.int64)
        self.m = int(m)
        self.n = int(n)
        self.row_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(deg, out=self.row_ptr[1:])
        self.col_idx = (
            np.concatenate(rows) if rows and self.row_ptr[-1] else np.zeros(0, np.int64)
        )
        for i, r in enumerate(rows):
            if len(np.unique(r)) != len(r):
                raise ValueError(f"duplicate incidence in row {i}")
            if len(r) and (r[0] < 0 or r[-1] >= n):
                raise ValueError(f"column index out of range in row {i}")
        # column-major view: edge indices sorted by (col, row)
        order = np.argsort(self.col_idx, kind="stable")
        self.col_edge = order.astype(np.int64)
        col_deg = np.bincount(self.col_idx, minlength=n).astype(np.int64)
        self.col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(col_deg, out=self.col_ptr[1:])
        self._edge_row = np.repeat(
            np.arange(m, dtype=np.int64), np.diff(self.row_ptr)
        )
        for a in (self.row_ptr, self.col_idx, self.col_edge, self.col_ptr,
                  self._edge_row):
            a.setflags(write=False)
        self._systematic = None  # encode_generic cache, set lazily

    @property
    def num_edges(self) -> int:
        return int(self.row_ptr[-1])

    def row(self, i: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]

    def col(self, j: int) -> np.ndarray:
        return self._edge_row[self.col_edge[self.col_ptr[j]:self.col_ptr[j + 1]]]

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        h[self._edge_row, self.col_idx] = 1
        return h

    def __eq__(self, other):
        return (
            isinstance(other, ParityCheckMatrix)
            and self.m == other.m
            and self.n == other.n
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
        )

    def __repr__(self):
        return f"ParityCheckMatrix(m={self.m}, n={self.n}, edges={self.num_edges})"


def xor_segments(values: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    """XOR-reduce ``values`` over the segments delimited by ``ptr``.

    Handles empty segments (reduceat alone would misreport them).
    ``values`` may be 1-D or 2-D with segments along the last axis.
    """
    nseg = len(ptr) - 1
    shape = values.shape[:-1] + (nseg,)
    out = np.zeros(shape, dtype=values.dtype)
    if values.shape[-1] == 0:
        return out
    nonempty = ptr[:-1] < ptr[1:]
    if not nonempty.any():
        return out
    starts = ptr[:-1][nonempty]
    red = np.bitwise_xor.reduceat(values, starts, axis=-1)
    out[..., nonempty] = red
    return out


def expand_base(base: BaseMatrix) -> ParityCheckMatrix:
    """Expand a base grid into its quasi-cyclic parity check matrix.

    Shift s becomes the z x z circulant with a 1 at (r, (r + s) mod z);
    null blocks become zero blocks.
    """
    z = base.z
    r_local = np.arange(z, dtype=np.int64)
    row_adj: list[list[int]] = [[] for _ in range(base.rows * z)]
    for bi, row in enumerate(base.entries):
        for bj, s in enumerate(row):
            if s == NULL_BLOCK:
                continue
            cols = bj * z + (r_local + s) % z
            for r, c in zip(r_local, cols):
                row_adj[bi * z + r].append(int(c))
    return ParityCheckMatrix(base.rows * z, base.cols * z, row_adj)


def syndrome(h: ParityCheckMatrix, bits: np.ndarray) -> Syndrome:
    """H * bits^T over GF(2); weight zero means a valid codeword."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (h.n,):
        raise ValueError(f"bits length {bits.shape} does not match n={h.n}")
    s = xor_segments(bits[h.col_idx], h.row_ptr)
    return Syndrome(s, int(np.count_nonzero(s)))


def degree_profile(h: ParityCheckMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Exact incidence counts (per-row weights, per-column weights)."""
    return np.diff(h.row_ptr), np.diff(h.col_ptr)


# ---------------------------------------------------------------------------
# base-matrix text format
#
# line 1: "<rows> <cols> <z>"; then `rows` lines of `cols` integers each,
# -1 for a null block, otherwise a shift in [0, z). '#' lines are comments.


def load_base_matrix(source: TextIO | str) -> BaseMatrix:
    """Parse the base-matrix text format; errors name line and column."""
    if isinstance(source, str):
        text = source
    else:
        text = source.read()
    data_lines: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        data_lines.append((lineno, stripped))
    if not data_lines:
        raise FormatError("line 1: empty input, expected '<rows> <cols> <z>' header")
    hline, header = data_lines[0]
    parts = header.split()
    if len(parts) != 3:
        raise FormatError(
            f"line {hline}: header must be '<rows> <cols> <z>', got {len(parts)} fields"
        )
    try:
        rows, cols, z = (int(p) for p in parts)
    except ValueError:
        raise FormatError(f"line {hline}: non-integer value in header") from None
    if rows < 1 or cols < 1 or z < 1:
        raise FormatError(f"line {hline}: rows, cols and z must be >= 1")
    body = data_lines[1:]
    if len(body) != rows:
        raise FormatError(
            f"line {hline}: expected {rows} matrix rows, found {len(body)}"
        )
    grid = []
    for i, (lineno, line) in enumerate(body):
        fields = line.split()
        if len(fields) != cols:
            raise FormatError(
                f"line {lineno}: expected {cols} entries, found {len(fields)}"
            )
        row = []
        for j, f in enumerate(fields):
            try:
                e = int(f)
            except ValueError:
                raise FormatError(
                    f"line {lineno}, column {j + 1}: '{f}' is not an integer"
                ) from None
            if e != NULL_BLOCK and not 0 <= e < z:
                raise FormatError(
                    f"line {lineno}, column {j + 1}: shift {e} outside [0, {z})"
                )
            row.append(e)
        grid.append(tuple(row))
    return BaseMatrix(rows, cols, z, tuple(grid))


def load_base_matrix_file(path) -> BaseMatrix:
    with open(path, "r", encoding="utf-8") as f:
        try:
            return load_base_matrix(f)
        except FormatError as err:
            raise FormatError(f"{path}: {err}") from None


def save_base_matrix(base: BaseMatrix, path, header_comments: Iterable[str] = ()):
    with open(path, "w", encoding="utf-8") as f:
        f.write(base.to_text(header_comments))


# ---------------------------------------------------------------------------
# alist interchange format (MacKay style, zero-padded index lists)


def write_alist(h: ParityCheckMatrix, stream: TextIO):
    """Write the expanded matrix in alist format (1-based, 0-padded)."""
    row_w, col_w = degree_profile(h)
    dmax_col = int(col_w.max()) if h.n else 0
    dmax_row = int(row_w.max()) if h.m else 0
    stream.write(f"{h.n} {h.m}\n")
    stream.write(f"{dmax_col} {dmax_row}\n")
    stream.write(" ".join(str(int(w)) for w in col_w) + "\n")
    stream.write(" ".join(str(int(w)) for w in row_w) + "\n")
    for j in range(h.n):
        idx = [str(int(r) + 1) for r in h.col(j)]
        idx += ["0"] * (dmax_col - len(idx))
        stream.write(" ".join(idx) + "\n")
    for i in range(h.m):
        idx = [str(int(c) + 1) for c in h.row(i)]
        idx += ["0"] * (dmax_row - len(idx))
        stream.write(" ".join(idx) + "\n")


def save_alist(h: ParityCheckMatrix, path):
    with open(path, "w", encoding="utf-8") as f:
        write_alist(h, f)


def load_alist(stream: TextIO) -> ParityCheckMatrix:
    tokens = stream.read().split()
    it = iter(tokens)
    try:
        n, m = int(next(it)), int(next(it))
        dmax_col, dmax_row = int(next(it)), int(next(it))
        col_w = [int(next(it)) for _ in range(n)]
        row_w = [int(next(it)) for _ in range(m)]
        # column lists are redundant with the row lists; skip them
        for j in range(n):
            pad = dmax_col if dmax_col else col_w[j]
            for _ in range(pad):
                next(it)
        row_adj = []
        for i in range(m):
            pad = dmax_row if dmax_row else row_w[i]
            vals = [int(next(it)) for _ in range(pad)]
            row_adj.append([v - 1 for v in vals if v > 0])
    except StopIteration:
        raise FormatError("alist input truncated") from None
    return ParityCheckMatrix(m, n, row_adj)


# ---------------------------------------------------------------------------
# structural queries used by the extension builder and encoder


class DualDiagonalProfile(NamedTuple):
    """Location of the 802.16e-style encodable parity part of a base grid.

    ``sigma`` is the paired top/bottom shift of the first parity column,
    ``r_mid`` the interior row where that column carries shift zero.
    """

    sigma: int
    r_mid: int


def dual_diagonal_profile(base: BaseMatrix) -> DualDiagonalProfile | None:
    """Detect the dual-diagonal parity structure, or None if absent.

    Requires: first parity column with non-null entries exactly at rows
    (0, r_mid, m-1), equal shifts at top and bottom, zero shift in the
    middle; remaining parity columns form the zero-shift staircase.
    """
    m = base.rows
    k = base.cols - m
    if k < 1 or m < 3:
        return None
    hb = [base.entries[i][k] for i in range(m)]
    nz = [i for i, e in enumerate(hb) if e != NULL_BLOCK]
    if len(nz) != 3 or nz[0] != 0 or nz[2] != m - 1:
        return None
    r_mid = nz[1]
    if hb[0] != hb[m - 1] or hb[r_mid] != 0 or not 0 < r_mid < m - 1:
        return None
    for j in range(1, m):
        col = [base.entries[i][k + j] for i in range(m)]
        nzj = [i for i, e in enumerate(col) if e != NULL_BLOCK]
        if nzj != [j - 1, j] or col[j - 1] != 0 or col[j] != 0:
            return None
    return DualDiagonalProfile(sigma=hb[0], r_mid=r_mid)


def block_four_cycles(
    row_a: dict[int, int], row_b: dict[int, int], z: int
) -> list[tuple[int, int]]:
    """Block-column pairs where two single-circulant rows close a 4-cycle.

    Rows are given as {block_col: shift}; a pair (c1, c2) shared by both
    rows closes z four-cycles iff the shift differences agree mod z.
    """
    shared = sorted(set(row_a) & set(row_b))
    bad = []
    for u in range(len(shared)):
        for v in range(u + 1, len(shared)):
            c1, c2 = shared[u], shared[v]
            if (row_a[c1] - row_a[c2] - row_b[c1] + row_b[c2]) % z == 0:
                bad.append((c1, c2))
    return bad
