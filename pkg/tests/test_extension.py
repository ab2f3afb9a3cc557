"""Extension construction, validation, rate selection, serialization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cvrldpc
from cvrldpc.codec import encode_chunk
from cvrldpc.extension import (
    ConstructionError,
    D_ABOVE_F,
    F_ABOVE_D,
    ExtendedCode,
    build_extension,
    load_extended,
    save_extended,
    select_rate,
    validate_structure,
)
from cvrldpc.matrix import (
    BaseMatrix,
    ParityCheckMatrix,
    block_four_cycles,
    expand_base,
    load_base_matrix_file,
    syndrome,
)
from cvrldpc.rng import Stream

MOTHER = load_base_matrix_file(cvrldpc.data_path(cvrldpc.MOTHER_R34A))


@pytest.fixture(scope="module")
def code():
    return build_extension(MOTHER, seed=1)


# a small dual-diagonal mother: 3 block rows, 12 block cols, z=12.
# parity column 9 has paired top/bottom shifts and a zero middle; columns
# 10-11 are the staircase. Big enough for 4-cycle-free extension draws.
TOY = BaseMatrix.from_grid(
    [
        [1, 3, 11, -1, 2, 7, -1, 0, 5, 6, 0, -1],
        [0, -1, 2, 9, -1, 4, 10, 3, -1, 0, 0, 0],
        [2, 1, -1, 5, 8, -1, 3, -1, 7, 6, -1, 0],
    ],
    z=12,
)


def test_paper_instance_dimensions(code):
    assert (code.assembled.m, code.assembled.n) == (432, 864)
    assert code.info_length == 432
    assert code.rate(code.max_extension_rows) == pytest.approx(0.5)
    assert code.n_short == 576 and code.n_full == 864


def test_determinism(code):
    again = build_extension(MOTHER, seed=1)
    assert again.assembled == code.assembled
    different = build_extension(MOTHER, seed=2)
    assert different.assembled != code.assembled


def test_validator_passes_fresh_build(code):
    rep = validate_structure(code)
    assert rep.passed, rep.to_text()
    assert rep.metadata["df-order"] == D_ABOVE_F


def test_toy_mother_extension_validates():
    toy = build_extension(TOY, seed=5)
    assert toy.assembled.m == 3 * TOY.rows * TOY.z
    assert toy.assembled.n == (TOY.cols + 2 * TOY.rows) * TOY.z
    assert validate_structure(toy).passed


def test_non_dual_diagonal_mother_rejected():
    bad = BaseMatrix.from_grid([[0, 0, 0], [0, 0, 0]], z=2)
    with pytest.raises(ConstructionError):
        build_extension(bad, seed=1)


def _tampered(code, row, col, add=True):
    """Copy the assembled matrix with one incidence added or removed."""
    h = code.assembled
    rows = [list(h.row(i)) for i in range(h.m)]
    if add:
        rows[row].append(col)
    else:
        rows[row].remove(col)
    tampered = ParityCheckMatrix(h.m, h.n, rows)
    return ExtendedCode(code.mother, code.base, code.seed, code.df_order, tampered)


def test_validator_catches_broken_g(code):
    # clear one G diagonal bit
    bad = _tampered(code, row=200, col=576 + (200 - 144), add=False)
    rep = validate_structure(bad)
    checks = {c.name: c for c in rep.checks}
    assert not checks["g-identity"].passed
    assert "row 200" in checks["g-identity"].detail


def test_validator_catches_bad_e_weight(code):
    # add an extra info-part incidence to an extension row
    row = 150
    present = set(int(c) for c in code.assembled.row(row))
    col = next(c for c in range(432) if c not in present)
    bad = _tampered(code, row=row, col=col, add=True)
    rep = validate_structure(bad)
    checks = {c.name: c for c in rep.checks}
    assert not checks["e-row-weight"].passed


def test_validator_catches_nonzero_c(code):
    bad = _tampered(code, row=0, col=600, add=True)
    rep = validate_structure(bad)
    checks = {c.name: c for c in rep.checks}
    assert not checks["c-zero"].passed
    assert "row 0" in checks["c-zero"].detail


def test_e_row_weights_in_range(code):
    h = code.assembled
    for i in range(144, 432):
        w = int(np.count_nonzero(h.row(i) < 432))
        assert w in (5, 6)


def test_extension_rows_close_no_new_four_cycles(code):
    # every pair of rows with an extension member shares at most one column
    # block-pair with matching shift difference: checked at block level
    base = code.base
    rows = [
        {j: s for j, s in enumerate(base.entries[i]) if s != -1}
        for i in range(base.rows)
    ]
    for a in range(base.rows):
        for b in range(max(a + 1, 6), base.rows):
            assert not block_four_cycles(rows[a], rows[b], base.z), (a, b)


def test_select_rate_endpoints(code):
    h0 = select_rate(code, 0)
    assert h0 == expand_base(MOTHER)
    h_full = select_rate(code, 288)
    assert h_full == code.assembled
    h_mid = select_rate(code, 144)
    assert (h_mid.m, h_mid.n) == (288, 720)
    assert 432 / 720 == pytest.approx(0.6)
    with pytest.raises(ValueError):
        select_rate(code, 289)
    with pytest.raises(ValueError):
        select_rate(code, -1)


@given(st.integers(0, 288))
@settings(max_examples=25, deadline=None)
def test_rate_formula_and_nesting(k):
    code = build_extension(MOTHER, seed=3)
    h = select_rate(code, k)
    assert h.n - h.m == 432  # info length is rate-invariant
    if k > 0:
        prev = select_rate(code, k - 1)
        inc_prev = {(i, int(c)) for i in range(prev.m) for c in prev.row(i)}
        inc = {(i, int(c)) for i in range(h.m) for c in h.row(i)}
        assert inc_prev <= inc


def test_codeword_nesting_across_rates(code):
    st_ = Stream(21)
    info = np.stack([st_.bits(432) for _ in range(8)])
    full = encode_chunk(code, 288, info)
    for k in (0, 37, 144, 288):
        h = select_rate(code, k)
        trunc = full[:, : 576 + k]
        for f in range(8):
            assert syndrome(h, trunc[f]).weight == 0


def test_df_order_flag():
    dfirst = build_extension(MOTHER, seed=4, df_order=D_ABOVE_F)
    ffirst = build_extension(MOTHER, seed=4, df_order=F_ABOVE_D)
    assert validate_structure(dfirst).passed
    assert validate_structure(ffirst).passed
    assert dfirst.d_block_rows() == range(0, 6)
    assert ffirst.d_block_rows() == range(6, 12)
    with pytest.raises(ValueError):
        build_extension(MOTHER, seed=4, df_order="sideways")


def test_serialization_round_trip(tmp_path, code):
    p = tmp_path / "ext.txt"
    save_extended(code, p, mother_name="wimax_r34a_z24.txt")
    again = load_extended(p)
    assert again.assembled == code.assembled
    assert again.mother == code.mother
    assert again.seed == code.seed
    assert again.df_order == code.df_order


def test_load_extended_requires_metadata(tmp_path, code):
    p = tmp_path / "bare.txt"
    p.write_text(code.base.to_text())
    with pytest.raises(Exception) as err:
        load_extended(p)
    assert "mother-rows" in str(err.value)
