import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hausfill.errors import BudgetExceeded, InvalidInput
from hausfill.spaces import (CantorUltrametric, Circle, EuclideanCube, Polyline, SinglePoint,
                             SnowflakeCube, build_net_hierarchy, connect, parse_space)


def triples(dim):
    return arrays(np.float64, (3, dim), elements=st.floats(0, 1, allow_nan=False))


@pytest.mark.parametrize("space", [EuclideanCube(1), EuclideanCube(2), SnowflakeCube(2, 0.5),
                                   Circle(), Polyline([[0, 0], [1, 0], [1, 1]])])
@given(data=st.data())
def test_metric_axioms(space, data):
    dim = space.dim
    if isinstance(space, Circle):
        pts = data.draw(arrays(np.float64, (3, 1), elements=st.floats(0, 1, allow_nan=False, exclude_max=True)))
    elif isinstance(space, Polyline):
        pts = data.draw(arrays(np.float64, (3, 1), elements=st.floats(0, space.length, allow_nan=False)))
    else:
        pts = data.draw(triples(dim))
    a, b, c = pts[:1], pts[1:2], pts[2:]
    dab, dba = space.distance(a, b)[0], space.distance(b, a)[0]
    assert dab == pytest.approx(dba, abs=1e-12)
    assert space.distance(a, c)[0] <= dab + space.distance(b, c)[0] + 1e-12
    assert space.distance(a, a)[0] == 0


def test_ultrametric_strong_triangle():
    U = CantorUltrametric(3, 0.4, 12)
    rng = np.random.default_rng(0)
    x, y, z = (rng.integers(0, 3, (10_000, 12)) for _ in range(3))
    assert (U.distance(x, z) <= np.maximum(U.distance(x, y), U.distance(y, z))).all()


def test_snowflake_distance_is_power():
    S = SnowflakeCube(2, 0.7)
    rng = np.random.default_rng(1)
    a, b = rng.random((500, 2)), rng.random((500, 2))
    e = np.sqrt(((a - b) ** 2).sum(1))
    assert np.allclose(S.distance(a, b), e ** 0.7, rtol=0, atol=1e-12)


def test_normalized_diameter():
    assert EuclideanCube(2).normalized().diameter <= 1 + 1e-12
    assert Circle().diameter <= 1


def test_square_net_covers():
    net = build_net_hierarchy(EuclideanCube(2), 5)
    assert net.sizes[0] == 1
    sample, res = EuclideanCube(2).validation_sample(7)
    for n, pts in enumerate(net.levels):
        d = EuclideanCube(2).nearest_distance(sample, pts)
        assert d.max() <= 2.0 ** -n
    assert net.sizes[5] > 4 ** 4


def test_single_point_net():
    net = build_net_hierarchy(SinglePoint([0.2, 0.3]), 4)
    assert net.sizes == [1] * 5


def test_circle_net_sizes():
    net = build_net_hierarchy(Circle(), 6)
    assert net.sizes == [2 ** n for n in range(7)]
    for n, pts in enumerate(net.levels):
        assert net.covering_radii[n] <= 2.0 ** -(n + 1) + 1e-12


@pytest.mark.parametrize("space", [EuclideanCube(2), Circle(), Polyline([[0, 0], [1, 0], [1, 0.5]])])
def test_parent_budget_and_connectors(space):
    net = build_net_hierarchy(space, 4)
    for n in range(1, 5):
        for j in range(net.sizes[n]):
            path = net.connector(n, j)
            parent = net.levels[n - 1][net.parents[n][j]]
            assert np.allclose(path(0.0), parent, atol=1e-12)
            assert np.array_equal(path(path.domain_length)[0], net.levels[n][j])
    total = sum(len(net.children(4, i)) for i in range(net.sizes[3]))
    assert total == net.sizes[4]


def test_snowflake_rejected_as_target():
    with pytest.raises(InvalidInput):
        build_net_hierarchy(SnowflakeCube(1, 0.5), 2)


def test_connect_examples():
    Q = EuclideanCube(2)
    g = connect([0, 0], [0.5, 0], 1, Q)
    assert np.allclose(g(0.25), [[0.25, 0.0]], atol=1e-12)
    assert g.domain_length == 1.0
    c = connect([0.3, 0.3], [0.3, 0.3], 3, Q)
    assert np.array_equal(c(np.linspace(0, 0.25, 5)), np.full((5, 2), 0.3))
    with pytest.raises(BudgetExceeded):
        connect([0, 0], [1, 1], 2, Q)


@pytest.mark.parametrize("space,p,q", [
    (EuclideanCube(2), [0.1, 0.2], [0.4, 0.5]),
    (Circle(), [0.9], [0.2]),
    (Polyline([[0, 0], [1, 0], [1, 1]]), [0.6], [1.3]),
])
def test_connector_is_one_lipschitz(space, p, q):
    g = connect(p, q, 1, space)
    rng = np.random.default_rng(2)
    s, t = rng.uniform(0, g.domain_length, (2, 100))
    d = space.distance(g(s), g(t))
    assert (d <= np.abs(s - t) * (1 + 1e-9) + 1e-12).all()


def test_parse_space_registry():
    assert parse_space("cube:3").dim == 3
    assert parse_space("snowflake:2:0.5").alpha == 0.5
    assert isinstance(parse_space("circle"), Circle)
    for bad in ("blob", "cube:x", "snowflake:1"):
        with pytest.raises(InvalidInput):
            parse_space(bad)
