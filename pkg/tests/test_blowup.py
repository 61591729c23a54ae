import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hausfill import blowup
from hausfill.blowup import (CantorColumns, HilbertCurve, blowup_demo, hilbert_eval,
                             holder_exponent, preimage)
from hausfill.covers import box_dimension
from hausfill.errors import DegenerateCurve, DepthExceeded, InvalidInput
from hausfill.sets import cantor_set

H = HilbertCurve()
S_CANTOR = math.log(2) / math.log(3)


@pytest.mark.parametrize("k", [0, 1, 5, 12, 26])
def test_start_corner(k):
    p = hilbert_eval(0.0, k)
    assert p.tolist() == [0.5 / 2 ** k] * 2


def test_end_corner_consistent():
    prev = None
    for k in range(1, 16):
        p = hilbert_eval(1.0, k)
        side = 2.0 ** -k
        assert p.tolist() == [1 - side / 2, side / 2]
        if prev is not None:
            # the finer square lies inside the coarser one
            assert abs(p[0] - prev[0]) <= side and abs(p[1] - prev[1]) <= side
        prev = p


@pytest.mark.parametrize("k", range(1, 9))
def test_adjacency_all_consecutive_cells(k):
    t = np.arange(4 ** k) / 4 ** k
    pts = H.eval(t, k) * 2 ** k
    step = np.abs(np.diff(pts, axis=0)).sum(axis=1)
    assert np.array_equal(step, np.ones(4 ** k - 1))


@pytest.mark.parametrize("k", range(0, 7))
def test_cell_map_refines(k):
    fine, coarse = H.cell_map(k + 1), H.cell_map(k)
    assert np.array_equal(fine // 2, np.repeat(coarse, 4, axis=0))


def test_depth_cap():
    with pytest.raises(DepthExceeded):
        hilbert_eval(0.5, 27)
    with pytest.raises(InvalidInput):
        hilbert_eval(1.5, 3)


def test_holder_examples():
    e = holder_exponent(H, 10, 10_000)
    assert 0.45 <= e.alpha <= 0.55 and e.upper <= 0.6 and e.lower <= e.alpha <= e.upper
    assert holder_exponent(blowup.identity_curve(), 10, 1000).alpha == pytest.approx(1.0, abs=0.05)
    assert holder_exponent(blowup.sqrt_curve(), 10, 1000).alpha == pytest.approx(0.5, abs=0.05)
    with pytest.raises(DegenerateCurve):
        holder_exponent(blowup.constant_curve(), 10, 1000)
    with pytest.raises(InvalidInput):
        holder_exponent(H, 10, 999)


@pytest.mark.parametrize("k", range(1, 8))
def test_left_half_preimage(k):
    side = 2 ** k
    cells = np.array([(x, y) for x in range(side // 2) for y in range(side)])
    assert preimage(H, cells, k).length == Fraction(1, 2)


def test_preimage_trivial_cases():
    every = np.array([(x, y) for x in range(8) for y in range(8)])
    u = preimage(H, every, 3)
    assert u.intervals == [(Fraction(0), Fraction(1))]
    assert preimage(H, np.empty((0, 2)), 3).length == 0
    with pytest.raises(InvalidInput):
        preimage(H, [[8, 0]], 3)


@given(st.integers(1, 8), st.data())
def test_preimage_length_is_area(k, data):
    side = 2 ** k
    x0 = data.draw(st.integers(0, side - 1))
    x1 = data.draw(st.integers(x0, side - 1))
    y0 = data.draw(st.integers(0, side - 1))
    y1 = data.draw(st.integers(y0, side - 1))
    xs, ys = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1), indexing="ij")
    cells = np.stack([xs.ravel(), ys.ravel()], axis=1)
    u = preimage(H, cells, k)
    assert u.length == Fraction((x1 - x0 + 1) * (y1 - y0 + 1), 4 ** k)
    ends = [b for a, b in u.intervals]
    starts = [a for a, b in u.intervals]
    assert all(s > e for e, s in zip(ends, starts[1:]))


def test_cantor_columns_exact_matches_triadic_sets():
    cc = CantorColumns(1 / 3, 5, 3)
    C = cantor_set()
    lefts = cc._numerators()
    assert np.array_equal(lefts, C.cells_at(5).ravel())
    float_cc = CantorColumns(1 / 3 + 1e-15, 5, None)
    for j in range(2, 9):
        assert abs(float_cc.column_count(j) - cc.column_count(j)) <= 2 ** 5


def test_blowup_cantor():
    rep = blowup_demo(S_CANTOR, 10)
    b = rep.bounds
    assert all(y <= x for x, y in zip(b, b[1:]))
    assert all(y < x for x, y in zip(b[3:], b[4:]))
    assert float(b[-1]) < 0.1
    assert rep.image_dimension.slope == pytest.approx(1 + S_CANTOR, abs=0.05)
    assert rep.to_csv().splitlines()[0] == "depth,preimage_bound,image_box_count"


def test_blowup_single_point():
    rep = blowup_demo(0.0, 10)
    assert rep.image_dimension.slope == pytest.approx(1.0, abs=0.05)
    assert float(rep.bounds[-1]) < 1e-2
    assert all(y < x for x, y in zip(rep.bounds, rep.bounds[1:]))


def test_blowup_general_ratio():
    rep = blowup_demo(0.7, 9)
    assert rep.image_dimension.slope == pytest.approx(1.7, abs=0.08)
    assert all(y <= x for x, y in zip(rep.bounds, rep.bounds[1:]))


def test_blowup_errors():
    with pytest.raises(DepthExceeded):
        blowup_demo(0.5, 13)
    with pytest.raises(InvalidInput):
        blowup_demo(1.0, 5)


def test_target_dimension_matches_covers_oracle():
    # box counting of C at triadic scales, plus one for the full interval factor
    assert box_dimension(cantor_set(), 3, 10).slope + 1 == pytest.approx(
        blowup_demo(S_CANTOR, 10).image_dimension.slope, abs=0.05)
