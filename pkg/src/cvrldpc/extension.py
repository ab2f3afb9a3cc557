"""Parity-check extension: turn a dual-diagonal mother code into a
rate-compatible family by appending seeded extension rows.

Layout of the extended base grid, in blocks (m1 = mother block rows,
k1 = mother info block columns, m2 = 2*m1 extension block rows)::

    [ mother info | mother parity | 0 ]     mother rows, untouched
    [      E      |       D       | G ]     first m1 extension block rows
    [      E      |       F       | G ]     last m1 extension block rows

E holds randomly drawn circulants, 5 or 6 per block row; D is an identity
band; F a block permutation with random shifts (one circulant per band row
and column); G an identity over the new parity columns. Because G is an
identity, any prefix of extension rows (with the matching parity columns)
is itself a valid parity check matrix, which is what makes the rate
continuously selectable. New rows are redrawn until they close no length-4
cycle with any previously placed row (mother rows included), since short
cycles measurably hurt belief propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix import (
    NULL_BLOCK,
    BaseMatrix,
    FormatError,
    ParityCheckMatrix,
    block_four_cycles,
    dual_diagonal_profile,
    expand_base,
)
from .rng import Stream, derive_seed

D_ABOVE_F = "d-above-f"
F_ABOVE_D = "f-above-d"

_MAX_REDRAWS = 100
_E_WEIGHTS = (5, 6)


class ConstructionError(ValueError):
    """Extension cannot be built from this mother code / seed."""


@dataclass
class ExtendedCode:
    """A mother code plus its extension blocks and the assembled matrix."""

    mother: BaseMatrix
    base: BaseMatrix
    seed: int | None
    df_order: str
    assembled: ParityCheckMatrix
    _caches: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def z(self) -> int:
        return self.mother.z

    @property
    def m1(self) -> int:
        return self.mother.rows

    @property
    def n1(self) -> int:
        return self.mother.cols

    @property
    def k1(self) -> int:
        return self.n1 - self.m1

    @property
    def m2(self) -> int:
        return 2 * self.m1

    @property
    def info_length(self) -> int:
        return self.k1 * self.z

    @property
    def n_short(self) -> int:
        return self.n1 * self.z

    @property
    def n_full(self) -> int:
        return (self.n1 + self.m2) * self.z

    @property
    def max_extension_rows(self) -> int:
        return self.m2 * self.z

    def rate(self, k: int) -> float:
        return self.info_length / (self.n_short + k)

    def rate_matrix(self, k: int) -> ParityCheckMatrix:
        """Cached :func:`select_rate`."""
        key = ("rate", k)
        if key not in self._caches:
            self._caches[key] = select_rate(self, k)
        return self._caches[key]

    def d_block_rows(self) -> range:
        """Extension block-row indices carrying the identity band."""
        return range(0, self.m1) if self.df_order == D_ABOVE_F else range(self.m1, self.m2)

    def f_block_rows(self) -> range:
        return range(self.m1, self.m2) if self.df_order == D_ABOVE_F else range(0, self.m1)


def _row_dict(base: BaseMatrix, i: int) -> dict[int, int]:
    return {j: s for j, s in enumerate(base.entries[i]) if s != NULL_BLOCK}


def build_extension(
    mother: BaseMatrix, seed: int, df_order: str = D_ABOVE_F
) -> ExtendedCode:
    """Deterministically extend ``mother`` to half its rate.

    Pure function of (mother, seed, df_order): the same inputs always
    produce the bit-identical assembled matrix.
    """
    if df_order not in (D_ABOVE_F, F_ABOVE_D):
        raise ValueError(f"df_order must be '{D_ABOVE_F}' or '{F_ABOVE_D}'")
    if dual_diagonal_profile(mother) is None:
        raise ConstructionError(
            "mother parity part is not dual-diagonal; the info/parity split "
            "needed by the extension is undefined"
        )
    m1, n1, z = mother.rows, mother.cols, mother.z
    k1 = n1 - m1
    m2 = 2 * m1
    stream = Stream(derive_seed(seed))

    # the F permutation and shifts are drawn up front so they do not move
    # with the number of E redraws
    perm = stream.permutation(m1)
    f_shifts = [stream.below(z) for _ in range(m1)]

    def band_entry(e: int) -> tuple[int, int]:
        d_first = df_order == D_ABOVE_F
        in_first_half = e < m1
        if in_first_half == d_first:
            i = e if in_first_half else e - m1
            return k1 + i, 0
        i = e if in_first_half else e - m1
        return k1 + perm[i], f_shifts[i]

    existing = [_row_dict(mother, i) for i in range(m1)]
    ext_rows: list[dict[int, int]] = []
    for e in range(m2):
        bcol, bshift = band_entry(e)
        cand = None
        for _ in range(_MAX_REDRAWS + 1):
            # toy mothers may have fewer info columns than the target weight
            w = min(_E_WEIGHTS[stream.below(len(_E_WEIGHTS))], k1)
            cols = stream.sample_distinct(k1, w)
            trial = {c: stream.below(z) for c in sorted(cols)}
            trial[bcol] = bshift
            if not any(block_four_cycles(trial, other, z) for other in existing):
                cand = trial
                break
        if cand is None:
            raise ConstructionError(
                f"extension row {e}: no 4-cycle-free draw in "
                f"{_MAX_REDRAWS} redraws"
            )
        existing.append(cand)
        ext_rows.append(cand)

    grid = []
    for i in range(m1):
        grid.append(tuple(mother.entries[i]) + (NULL_BLOCK,) * m2)
    for e, row in enumerate(ext_rows):
        full = [NULL_BLOCK] * (n1 + m2)
        for c, s in row.items():
            full[c] = s
        full[n1 + e] = 0
        grid.append(tuple(full))
    base = BaseMatrix(m1 + m2, n1 + m2, z, tuple(grid))
    return ExtendedCode(mother, base, seed, df_order, expand_base(base))


def select_rate(code: ExtendedCode, k: int) -> ParityCheckMatrix:
    """Sub-matrix of the mother rows plus the first ``k`` extension rows,
    restricted to the first ``n_short + k`` columns.

    Valid for every k because extension row i reaches extension-parity
    column i only (G is an identity), so no incidence is cut.
    """
    if not 0 <= k <= code.max_extension_rows:
        raise ValueError(f"k={k} outside [0, {code.max_extension_rows}]")
    h = code.assembled
    m1z = code.m1 * code.z
    rows = [h.row(i) for i in range(m1z + k)]
    return ParityCheckMatrix(m1z + k, code.n_short + k, rows)


# ---------------------------------------------------------------------------
# structural validation


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        tail = f" ({self.detail})" if self.detail else ""
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}{tail}"


@dataclass
class ValidationReport:
    checks: list[ValidationCheck]
    metadata: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [str(c) for c in self.checks]
        lines.append("")
        for k, v in self.metadata.items():
            lines.append(f"{k}: {v}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def validate_structure(code: ExtendedCode) -> ValidationReport:
    """Check every structural constraint of the extension layout, reporting
    the first offending coordinate per failed constraint."""
    h = code.assembled
    z = code.z
    m1z, n1z, k1z = code.m1 * z, code.n1 * z, code.k1 * z
    m2z = code.m2 * z
    checks = []

    def first_violation(pred_rows):
        for i, col in pred_rows:
            return f"row {i}, col {col}"
        return ""

    # c-zero: mother rows must not reach the extension parity columns
    bad = [(i, int(c)) for i in range(m1z) for c in h.row(i) if c >= n1z]
    checks.append(ValidationCheck("c-zero", not bad, first_violation(bad)))

    # mother embedding: top-left corner equals the expanded mother exactly
    mh = expand_base(code.mother)
    bad = []
    for i in range(m1z):
        got = h.row(i)[h.row(i) < n1z]
        if not np.array_equal(got, mh.row(i)):
            bad.append((i, int(got[0]) if len(got) else -1))
            break
    checks.append(
        ValidationCheck("mother-embedding", not bad, first_violation(bad))
    )

    # d-identity: the D half of the band under B is an m1z x m1z identity
    bad = []
    for li, be in enumerate(code.d_block_rows()):
        for r in range(z):
            i = m1z + be * z + r
            band = [int(c) for c in h.row(i) if k1z <= c < n1z]
            want = k1z + li * z + r
            if band != [want]:
                bad.append((i, band[0] if band else -1))
                break
        if bad:
            break
    checks.append(ValidationCheck("d-identity", not bad, first_violation(bad)))

    # f-permutation: one band entry per F row and per band column
    bad = []
    col_hits = np.zeros(m1z, dtype=np.int64)
    for be in code.f_block_rows():
        for r in range(z):
            i = m1z + be * z + r
            band = [int(c) for c in h.row(i) if k1z <= c < n1z]
            if len(band) != 1:
                bad.append((i, band[0] if band else -1))
                break
            col_hits[band[0] - k1z] += 1
        if bad:
            break
    if not bad and np.any(col_hits != 1):
        j = int(np.argmax(col_hits != 1))
        bad = [(-1, k1z + j)]
    checks.append(ValidationCheck("f-permutation", not bad, first_violation(bad)))

    # e-row-weight: 5 or 6 ones per expanded extension row in the info part
    # (capped by the number of info block columns on toy-sized mothers)
    allowed = {min(w, code.k1) for w in _E_WEIGHTS}
    bad = []
    for i in range(m1z, m1z + m2z):
        wgt = int(np.count_nonzero(h.row(i) < k1z))
        if wgt not in allowed:
            bad.append((i, wgt))
            break
    checks.append(
        ValidationCheck(
            "e-row-weight", not bad,
            f"row {bad[0][0]} has weight {bad[0][1]}" if bad else "",
        )
    )

    # g-identity: extension row i reaches exactly extension column i
    bad = []
    for li in range(m2z):
        i = m1z + li
        tail = [int(c) for c in h.row(i) if c >= n1z]
        if tail != [n1z + li]:
            bad.append((i, tail[0] if tail else -1))
            break
    checks.append(ValidationCheck("g-identity", not bad, first_violation(bad)))

    meta = {
        "seed": code.seed,
        "df-order": code.df_order,
        "z": z,
        "mother": f"{code.m1}x{code.n1} blocks ({m1z}x{n1z} expanded)",
        "assembled": f"{h.m}x{h.n}",
        "full-rate": f"{code.info_length}/{code.n_full}",
    }
    return ValidationReport(checks, meta)


# ---------------------------------------------------------------------------
# serialization (base-matrix text format with structured header comments)


def save_extended(code: ExtendedCode, path, mother_name: str = ""):
    comments = [
        "extended parity check code",
        f"seed: {code.seed}",
        f"df-order: {code.df_order}",
        f"mother-rows: {code.m1}",
        f"mother-cols: {code.n1}",
    ]
    if mother_name:
        comments.append(f"mother-file: {mother_name}")
    with open(path, "w", encoding="utf-8") as f:
        f.write(code.base.to_text(comments))


def load_extended(path) -> ExtendedCode:
    """Rebuild an ExtendedCode from a file written by :func:`save_extended`.

    The stored grid is authoritative; the seed comment is informational.
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    meta = {}
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("#") and ":" in s:
            key, _, val = s.lstrip("# ").partition(":")
            meta[key.strip()] = val.strip()
    try:
        m1 = int(meta["mother-rows"])
        n1 = int(meta["mother-cols"])
    except KeyError as missing:
        raise FormatError(
            f"{path}: missing '{missing.args[0]}' header comment; not an "
            "extended-code file"
        ) from None
    from .matrix import load_base_matrix

    base = load_base_matrix(text)
    if base.rows != 3 * m1 or base.cols != n1 + 2 * m1:
        raise FormatError(
            f"{path}: grid {base.rows}x{base.cols} does not match mother "
            f"{m1}x{n1} plus 2*{m1} extension rows"
        )
    mother = BaseMatrix.from_grid(
        [row[:n1] for row in base.entries[:m1]], base.z
    )
    seed = int(meta["seed"]) if meta.get("seed", "").lstrip("-").isdigit() else None
    df_order = meta.get("df-order", D_ABOVE_F)
    return ExtendedCode(mother, base, seed, df_order, expand_base(base))
