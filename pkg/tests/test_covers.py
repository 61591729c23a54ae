import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hausfill import covers
from hausfill.covers import (ball_cover, box_dimension, certified_bounds, greedy_disjoint_subsets,
                             grid_cover, measure_upper_profile, net_is_maximal, separated_net,
                             verify_grid_cover)
from hausfill.errors import InsufficientMass, InvalidInput, ResolutionExceeded, UndefinedDimension
from hausfill.hfun import power
from hausfill.sets import cantor_set, empty_set, point_set, unit_interval, unit_square
from hausfill.spaces import EuclideanCube, SinglePoint

S_CANTOR = math.log(2) / math.log(3)


def test_interval_eighths():
    c = grid_cover(unit_interval(), power(1), 1 / 8)
    assert c.cell_count == 8 and c.sum == 1.0 and c.exact_sum == 1


@pytest.mark.parametrize("k", [1, 3, 6, 9])
def test_cantor_canonical_cover(k):
    c = grid_cover(cantor_set(), power(S_CANTOR), 3.0 ** -k)
    assert c.cell_count == 2 ** k
    assert c.sum == pytest.approx(1.0, abs=1e-9)


def test_empty_cover():
    c = grid_cover(empty_set(), power(1), 0.1)
    assert c.sum == 0 and c.cell_count == 0


def test_resolution_exceeded():
    with pytest.raises(ResolutionExceeded):
        grid_cover(unit_interval(depth=4), power(1), 1e-3)


def test_square_cells_use_diagonal():
    c = grid_cover(unit_square(), power(2), 0.75)
    assert c.level == 1
    assert c.diameters[0] == pytest.approx(math.sqrt(2) / 2)
    assert c.sum == pytest.approx(4 * 0.5)


@given(st.sampled_from(["interval", "square", "cantor", "point"]),
       st.floats(2e-3, 1.0), st.sampled_from([0.4, 1.0, 2.0]))
def test_cover_validity(name, delta, s):
    E = {"interval": unit_interval(), "square": unit_square(), "cantor": cantor_set(),
         "point": point_set([0.3, 0.7])}[name]
    c = grid_cover(E, power(s), delta)
    assert verify_grid_cover(c, E)
    assert c.exact_sum == c.recompute(power(s))
    assert (c.diameters <= delta * (1 + 1e-12)).all()


@given(st.lists(st.integers(0, 12), min_size=2, max_size=8, unique=True),
       st.sampled_from([0.3, S_CANTOR, 0.9]))
def test_certified_bounds_monotone(levels, s):
    E = cantor_set()
    deltas = sorted({E.cell_diameter(j) * 1.01 for j in levels}, reverse=True)
    prof = measure_upper_profile(E, power(s), deltas)
    best = certified_bounds(prof)
    assert all(b >= a for a, b in zip(best, best[1:]))
    assert all(b <= c.sum for b, c in zip(best, prof))


def test_profile_requires_decreasing():
    with pytest.raises(InvalidInput):
        measure_upper_profile(unit_interval(), power(1), [0.1, 0.2])


def test_profile_trends():
    C = cantor_set()
    deltas = [3.0 ** -k for k in range(1, 13)]
    low = [c.sum for c in measure_upper_profile(C, power(0.4), deltas)]
    mid = [c.sum for c in measure_upper_profile(C, power(S_CANTOR), deltas)]
    high = [c.sum for c in measure_upper_profile(C, power(0.9), deltas)]
    assert all(b > a for a, b in zip(low, low[1:])) and low[-1] > 10
    assert all(0.9 <= v <= 1.1 for v in mid)
    assert high[-1] < 0.05
    pt = [c.sum for c in measure_upper_profile(point_set([0.4]), power(1), [2.0 ** -k for k in range(1, 12)])]
    assert pt[-1] < pt[0] and pt[-1] < 1e-3


def test_box_dimension_examples():
    assert box_dimension(unit_square(), 3, 10).slope == pytest.approx(2.0, abs=0.05)
    assert box_dimension(cantor_set(), 3, 10).slope == pytest.approx(S_CANTOR, abs=0.02)
    est = box_dimension(point_set([0.2, 0.9]), 3, 10)
    assert est.slope == pytest.approx(0.0, abs=1e-12)
    assert 0 <= est.r2 <= 1 and len(est.scales) >= 4


def test_box_dimension_errors():
    with pytest.raises(UndefinedDimension):
        box_dimension(empty_set(), 0, 4)
    with pytest.raises(InvalidInput):
        box_dimension(unit_square(), 3, 5)


def test_greedy_quadrants():
    parts = greedy_disjoint_subsets(unit_square(), power(2), 4, 1)
    got = [tuple(p.cells_at(1)[0]) for p in parts]
    assert got == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_greedy_cantor_halves():
    parts = greedy_disjoint_subsets(cantor_set(), power(S_CANTOR), 2, 1)
    for p in parts:
        assert grid_cover(p, power(S_CANTOR), 3.0 ** -8).sum == pytest.approx(0.5, abs=1e-9)
    a, b = (set(map(tuple, p.cells_at(6).tolist())) for p in parts)
    assert not a & b


def test_greedy_insufficient():
    with pytest.raises(InsufficientMass):
        greedy_disjoint_subsets(unit_interval(), power(1), 2 ** 3 + 1, 3)


def test_separated_net_examples():
    net = separated_net(EuclideanCube(1), 0.5, stream=np.linspace(0, 1, 9))
    assert net.ravel().tolist() == [0.0, 0.5, 1.0]
    corners = separated_net(EuclideanCube(2), 1.0, stream=[[0, 0], [0, 1], [1, 0], [1, 1], [0.5, 0.5]])
    assert corners.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    single = separated_net(SinglePoint([0.2, 0.4]), 0.1)
    assert single.tolist() == [[0.2, 0.4]]


@given(st.floats(0.05, 1.0), st.sampled_from([1, 2]))
def test_separated_net_properties(sep, dim):
    S = EuclideanCube(dim)
    stream = S.sample(4)
    net = separated_net(S, sep, stream=stream)
    d = S.pairwise(net, net)
    np.fill_diagonal(d, np.inf)
    assert (d >= sep - 1e-12).all()
    assert net_is_maximal(S, net, stream, sep)


def test_ball_cover_exact_and_checks():
    S = EuclideanCube(1)
    cov = ball_cover(S, [[0.1], [0.5]], [[0.1], [0.5]], 0.05, power(1), 0.1)
    assert cov.exact_sum == 2 * Fraction(0.1)
    with pytest.raises(InvalidInput):
        ball_cover(S, [[0.9]], [[0.1]], 0.05, power(1), 0.1)
    with pytest.raises(InvalidInput):
        ball_cover(S, [[0.1]], [[0.1]], 0.2, power(1), 0.1)


def test_cover_serialisation():
    row = grid_cover(unit_interval(), power(1), 0.25).to_row()
    assert row == {"delta": 0.25, "cell_count": 4, "sum": 1.0}
    assert covers.fit_dimension([1, 0.5, 0.25, 0.125], [1, 2, 4, 8]).to_rows()[0] == {"scale": 1.0, "count": 1}
