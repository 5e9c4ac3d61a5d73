import pytest

from ahtoric.certificates import block_contribution, expected_dimension, verify_certificate
from ahtoric.configs import (
    CHUNKS,
    ConfigError,
    block_certificate,
    build_certificate,
    certificate_json,
    expected_units,
    golden_path,
    load_certificate,
    odd_layer_config,
    odd_layer_sets,
    stripe_layout,
)


@pytest.mark.parametrize("k", [3, 5, 7, 9])
def test_odd_layer(k):
    c = odd_layer_config(k)
    r = verify_certificate(c)
    assert r.passed and r.contributions == (k + 1) ** 2 // 4 and not r.uncovered


def test_odd_layer_rejects_even_k():
    with pytest.raises(ConfigError):
        odd_layer_sets(4)


@pytest.mark.parametrize("d", range(5, 17))
def test_small_degrees(d):
    r = verify_certificate(build_certificate(d))
    assert r.passed
    assert r.claimed_k == expected_dimension(d).n_d
    assert r.contributions == expected_units(d)


def test_uncovered_counts_follow_the_codim_class():
    for d in (8, 10, 12):
        r = verify_certificate(build_certificate(d))
        assert len(r.uncovered) == expected_dimension(d).codim_class


def test_low_degrees_are_rejected():
    with pytest.raises(ConfigError):
        build_certificate(4)


@pytest.mark.parametrize("d", range(14, 40, 2))
def test_stripe_layout_fills_the_stripe(d):
    width = sum(CHUNKS[c][1] - CHUNKS[c][0] + 1 for c in stripe_layout(d))
    assert width == d - 7


@pytest.mark.parametrize("d", range(5, 23))
def test_golden_files_are_present_and_verify(d):
    assert golden_path(d).is_file()
    r = verify_certificate(load_certificate(d))
    assert r.passed and r.claimed_k == expected_dimension(d).n_d


@pytest.mark.parametrize("d", [5, 8, 12, 14])
def test_golden_bytes_match_a_fresh_build(d):
    assert golden_path(d).read_text() == certificate_json(build_certificate(d))


@pytest.mark.slow
@pytest.mark.parametrize("d", [17, 20, 22])
def test_golden_bytes_match_a_fresh_build_large(d):
    assert golden_path(d).read_text() == certificate_json(build_certificate(d))


def test_missing_golden_file():
    assert load_certificate(99) is None


BLOCKS = ["gamma7", "P7", "P9", "C7", "H9", "Xi", "Tstar7", "Tstar9", "B8", "B10"]


@pytest.mark.parametrize("name", BLOCKS)
def test_block_certificates_match_the_catalog(name):
    r = verify_certificate(block_certificate(name))
    assert r.passed and r.contributions == block_contribution(name)


@pytest.mark.slow
@pytest.mark.parametrize("family, value", [(10, 276), (12, 362)])
def test_a_block_certificate(family, value):
    r = verify_certificate(block_certificate("A", {"k": 2, "family": family}))
    assert r.passed and r.contributions == value


@pytest.mark.slow
@pytest.mark.parametrize("d", [24, 26, 28, 32, 34, 36, 40])
def test_spot_golden_files(d):
    r = verify_certificate(load_certificate(d))
    e = expected_dimension(d)
    assert r.passed and r.claimed_k == e.n_d
    assert len(r.uncovered) == e.codim_class
