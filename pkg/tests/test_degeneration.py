from math import comb

import pytest

from ahtoric.degeneration import (
    BLOCK_NAMES,
    BlockError,
    CellKind,
    MissingLift,
    build_block,
    build_layer,
    build_standard_subdivision,
    check_regularity,
    cube_form,
    evaluate,
)
from ahtoric.geometry import disjoint

CUBE, TETRA, SIGMA, SEMI = CellKind.CUBE, CellKind.CORNER_TETRA, CellKind.SIGMA, CellKind.SEMICUBE


def test_delta1_is_one_tetrahedron():
    S = build_standard_subdivision(1)
    assert [c.kind for c in S.cells] == [TETRA]


@pytest.mark.parametrize("d", range(1, 15))
def test_standard_counts(d):
    n = build_standard_subdivision(d).counts()
    assert (n[CUBE], n[TETRA], n[SIGMA]) == (comb(d, 3), d * (d + 1) // 2, d * (d - 1) // 2)


def test_delta6_points():
    assert len(build_standard_subdivision(6).points) == 84


def test_cell_vertex_counts():
    sizes = {CUBE: 8, TETRA: 4, SIGMA: 7}
    for c in build_standard_subdivision(6).cells:
        assert len(c.vertices) == sizes[c.kind]
        assert all(a <= v[i] <= a + 1 for v in c.vertices for i, a in enumerate(c.anchor))


@pytest.mark.parametrize("k", range(1, 15))
def test_layer_counts(k):
    S = build_layer(k)
    n = S.counts()
    assert (n[CUBE], n[TETRA], n[SIGMA]) == ((k - 1) * (k - 2) // 2, k, k - 1)
    assert len(S.points) == (k + 1) ** 2


@pytest.mark.parametrize("d", [5, 9])
def test_layers_sit_inside_the_simplex(d):
    S = build_standard_subdivision(d)
    for k in range(1, d + 1):
        z0 = d - k
        mine = sorted((c.kind, c.anchor) for c in S.cells if c.anchor[2] == z0)
        layer = sorted((c.kind, (c.anchor[0], c.anchor[1], c.anchor[2] + z0)) for c in build_layer(k).cells)
        assert mine == layer


def test_cells_partition_the_simplex():
    S = build_standard_subdivision(4)
    union = set().union(*(c.points for c in S.cells))
    assert union == set(S.points)
    # neighbouring cells meet only on their boundary
    for i, a in enumerate(S.cells):
        for b in S.cells[i + 1 :]:
            if max(abs(x - y) for x, y in zip(a.anchor, b.anchor)) <= 1:
                shared = a.points & b.points
                assert len(shared) < min(len(a.points), len(b.points))
    far = [c for c in S.cells if c.anchor == (0, 0, 0)][0], [c for c in S.cells if c.anchor == (2, 0, 0)][0]
    assert disjoint(far[0].geometry, far[1].geometry)


def test_hand_evaluated_forms():
    assert evaluate(cube_form((0, 0, 0)), (2, 0, 0)) == 2
    assert evaluate(cube_form((1, 0, 0)), (2, 0, 0)) == 4


@pytest.mark.parametrize("d", [2, 6, 10, 14])
def test_standard_lift_is_regular(d):
    assert check_regularity(build_standard_subdivision(d)).passed


def test_flat_lift_fails():
    S = build_standard_subdivision(6)
    rep = check_regularity(S.with_lift([(0, 0, 0, 0)] * len(S.cells)))
    assert not rep.passed and rep.cell_index is not None


def test_single_zeroed_form_fails():
    S = build_standard_subdivision(6)
    lift = list(S.lift)
    lift[len(lift) // 2] = (0, 0, 0, 0)
    assert not check_regularity(S.with_lift(lift)).passed


def test_missing_lift_is_an_error():
    S = build_standard_subdivision(3).with_lift(None)
    with pytest.raises(MissingLift):
        check_regularity(S)


BLOCK_POINTS = {
    "gamma7": 24,
    "P7": 288,
    "C7": 512,
    "H9": 792,
    "Xi": 428,
    "Tstar7": 112,
    "Tstar9": 168,
    "Tstar11": 224,
    "B8": 196,
    "B10": 252,
    "B12": 308,
}


@pytest.mark.parametrize("name, count", sorted(BLOCK_POINTS.items()))
def test_block_points_and_regularity(name, count):
    S = build_block(name)
    assert len(S.points) == count
    assert check_regularity(S).passed


def test_gamma7_is_seven_semicubes():
    assert build_block("gamma7").counts()[SEMI] == 7


@pytest.mark.parametrize("family, count", [(10, 1104), (12, 1448)])
def test_a_block(family, count):
    S = build_block("A", {"k": 2, "family": family})
    assert len(S.points) == count
    assert check_regularity(S).passed


def test_block_errors():
    with pytest.raises(BlockError):
        build_block("nonsense")
    with pytest.raises(BlockError):
        build_block("A", {"k": 2, "family": 11})
    with pytest.raises(BlockError):
        build_block("A", {"k": 3, "family": 10})


def test_every_catalog_block_builds():
    for name in BLOCK_NAMES:
        params = {"k": 2, "family": 10} if name == "A" else None
        assert build_block(name, params).cells


def test_json_round_trip_is_stable():
    S = build_standard_subdivision(3)
    assert S.dumps() == build_standard_subdivision(3).dumps()
    assert S.to_json()["lift"][0]["form"] == list(cube_form(S.cells[0].anchor))
