from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ahtoric.certificates import (
    Certificate,
    Unit,
    UnitKind,
    alpha_plus_one,
    block_contribution,
    check_identities,
    classify_all_k,
    expected_dimension,
    is_corner_tetra,
    residue_codim,
    n_plus_one,
    unit_legality,
    units_from_json,
    verify_certificate,
)
from ahtoric.configs import even_base_config, odd_layer_config, standard
from ahtoric.degeneration import build_layer, build_standard_subdivision

T, LC, LS, PAIR = UnitKind.TANGENT, UnitKind.LIMIT_CUBE, UnitKind.LIMIT_SIGMA, UnitKind.CUBE_PAIR


def _cell(S, anchor):
    return next(i for i, c in enumerate(S.cells) if c.anchor == anchor)


@pytest.mark.parametrize(
    "d, n_d, codim", [(5, 13, 0), (6, 20, 0), (8, 40, 1), (10, 70, 2), (12, 112, 3), (14, 169, 0)]
)
def test_expected_dimension(d, n_d, codim):
    e = expected_dimension(d)
    assert (e.n_d, e.codim_class, e.N_d) == (n_d, codim, comb(d + 3, 3) - 1)


@given(st.integers(1, 400))
def test_codim_class_matches_the_residue_split(d):
    e = expected_dimension(d)
    assert 0 <= e.codim_class <= 3
    if d >= 5:
        assert e.codim_class == residue_codim(d)


def test_expected_dimension_rejects_zero():
    with pytest.raises(ValueError):
        expected_dimension(0)


def test_corner_tetra_shape():
    assert is_corner_tetra({(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)})
    assert is_corner_tetra({(1, 1, 1), (0, 1, 1), (1, 0, 1), (1, 1, 0)})
    assert not is_corner_tetra({(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)})


def test_unit_legality():
    S = build_standard_subdivision(3)
    cube = _cell(S, (0, 0, 0))
    corner = frozenset({(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)})
    alternate = frozenset({(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)})
    assert unit_legality(Unit(T, cube, corner), S) is None
    assert unit_legality(Unit(LC, cube, alternate), S) is None
    assert unit_legality(Unit(T, cube, alternate), S) is not None
    assert unit_legality(Unit(LS, cube, alternate), S) is not None
    assert unit_legality(Unit(PAIR, cube, S.cells[cube].points), S) is None
    flat = frozenset({(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)})
    assert unit_legality(Unit(LC, cube, flat), S) is not None
    assert unit_legality(Unit(T, 999, corner), S) is not None


def test_empty_certificate_passes_vacuously():
    r = verify_certificate(Certificate(build_standard_subdivision(2), (), -1))
    assert r.passed and r.span_dimension == -1


def test_delta6_certificate():
    r = verify_certificate(even_base_config(6))
    assert r.passed and r.claimed_k == 20 and r.units == 21 and not r.uncovered


def test_wrong_claim_fails():
    c = odd_layer_config(5)
    c.claimed_secant_index += 1
    r = verify_certificate(c)
    assert not r.passed and "claimed" in r.reason


def test_shared_vertex_fails():
    S = build_layer(3)
    a = Unit(T, _cell(S, (0, 0, 0)), frozenset({(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}))
    b = Unit(T, _cell(S, (1, 0, 0)), frozenset({(1, 0, 0), (2, 0, 0), (1, 1, 0), (1, 0, 1)}))
    r = verify_certificate(Certificate(S, (a, b), 1))
    assert not r.passed and r.reason == "units share a vertex"


def test_overlapping_hulls_fail():
    S = build_layer(3)
    cube = _cell(S, (0, 0, 0))
    a = Unit(LC, cube, frozenset({(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)}))
    b = Unit(LC, cube, frozenset({(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)}))
    r = verify_certificate(Certificate(S, (a, b), 1))
    assert not r.passed and r.reason == "unit polytopes intersect" and r.witness == (0, 1)


def test_irregular_host_fails():
    S = build_layer(3)
    c = Certificate(S.with_lift([(0, 0, 0, 0)] * len(S.cells)), (), -1)
    assert not verify_certificate(c).passed


def test_json_round_trip():
    c = even_base_config(8)
    back = units_from_json(c.to_json(), c.host)
    assert back == c.units
    assert c.dumps() == even_base_config(8).dumps()


def test_region_tallies_for_d8():
    r = verify_certificate(even_base_config(8))
    assert r.region_tallies["S1_8"]["uncovered"] == 1
    assert r.region_tallies["S1_8"]["contributions"] == 20
    assert r.span_dimension == 4 * 41 - 1


@given(st.integers(7, 301).filter(lambda d: d % 2))
def test_odd_recursion(d):
    assert n_plus_one(d) - n_plus_one(d - 2) == (d + 1) ** 2 // 4


def test_alpha_values():
    assert alpha_plus_one(2, 10) == 276 and alpha_plus_one(2, 12) == 362
    # the k = 3 blocks appear at d = 34 and d = 36
    assert alpha_plus_one(3, 10) == 8 * (35 + sum(range(3, 6))) + 6 * 6
    assert alpha_plus_one(3, 12) == 8 * (46 + sum(range(4, 7))) + 6 * 7
    with pytest.raises(ValueError):
        alpha_plus_one(1, 10)


def test_block_contribution_table():
    assert block_contribution("gamma7") == 6
    assert block_contribution("A", {"k": 2, "family": 12}) == 362
    with pytest.raises(KeyError):
        block_contribution("nope")


def test_identities():
    rep = check_identities(40)
    spots = {22: 405, 26: 581, 28: 681, 34: 1029, 36: 1161, 40: 1449}
    for d, v in spots.items():
        line = next(l for l in rep.lines if l.d == d and l.family != "odd")
        assert line.formula == v == line.required and line.ok and not line.flagged
    bad = rep.line(24)
    assert bad.flagged and (bad.formula, bad.required) == (777, 489)
    assert rep.passed


def test_identity_range():
    with pytest.raises(ValueError):
        check_identities(4)


def test_classify():
    claims = classify_all_k(12, True)
    assert any(c.oracle_required for c in claims)
    assert not any(c.oracle_required for c in classify_all_k(8, True))
    with pytest.raises(ValueError):
        classify_all_k(8, False)


def test_host_lookup_cache_is_per_subdivision():
    assert standard(6) is standard(6)
