import numpy as np
import pytest

from hausfill.errors import InvalidInput, ResolutionExceeded
from hausfill.sets import (cantor_set, depth_cap, empty_set, from_cells, parse_set, point_set,
                           unit_interval, unit_square)
from hausfill.spaces import EuclideanCube


def test_counts():
    assert unit_square().cells_at(3).shape == (64, 2)
    assert cantor_set().cells_at(5).shape == (32, 1)
    assert cantor_set(2).cells_at(2).shape == (16, 2)
    assert point_set([0.3, 0.6]).cells_at(10).shape == (1, 2)
    assert empty_set().is_empty()


def test_resolution_cap():
    assert depth_cap(2) == 26 and depth_cap(3) == 24
    with pytest.raises(ResolutionExceeded):
        unit_interval(depth=4).cells_at(5)


def test_cantor_anchors_are_in_the_set():
    C = cantor_set()
    cells = C.cells_at(4)
    anchors = C.anchors(4, cells)
    assert C.contains_points(anchors, 12).all()


def test_cells_in_box_matches_filter():
    C = cantor_set()
    got = C.cells_in_box(5, [0.2], [0.4])
    all_cells = C.cells_at(5)
    s = C.cell_side(5)
    ref = all_cells[((all_cells + 1) * s >= 0.2) & (all_cells * s <= 0.4)][:, None]
    assert np.array_equal(got, ref.reshape(-1, 1))


def test_restrict_and_perfect():
    C = cantor_set()
    left = C.restrict(1, [0])
    assert (left.cells_at(3) < 9).all()
    assert C.perfect_like(0, 6)
    single = from_cells(EuclideanCube(1), 2, 3, [[2]])
    assert not single.perfect_like(0, 3)


def test_parse_set_registry():
    assert parse_set("cantor-dust:2").dim == 2
    assert parse_set("point:0.5").rule == "points"
    with pytest.raises(InvalidInput):
        parse_set("sponge")
