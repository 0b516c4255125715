import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_deficiency.coeffs import CoefficientError, block_to_band, make_family
from jacobi_deficiency.criteria import NO_CONCLUSION, SELF_ADJOINT, band_limsup, band_quantities
from jacobi_deficiency.powers import (brute_force_power, k2_limsup, k2_ratios, power_coeffs,
                                      power_consistency_probe, power_limsup_criterion)


def test_first_power_is_j():
    a, b = np.array([1, 2, 3, 4, 5]), np.array([6, 7, 8, 9, 10])
    band = power_coeffs(a, b, 1, 3)
    assert list(band.diags[0]) == [1, 2, 3, 4]
    assert list(band.diags[1]) == [6, 7, 8, 9]


def test_second_power_interior_entries():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=20), rng.uniform(0.5, 2, 20)
    band = power_coeffs(a, b, 2, 15)
    for n in range(1, 15):
        assert band.entry(n, n) == pytest.approx(b[n - 1] ** 2 + a[n] ** 2 + b[n] ** 2)
        assert band.entry(n, n + 1) == pytest.approx(b[n] * (a[n] + a[n + 1]))
        assert band.entry(n, n + 2) == pytest.approx(b[n] * b[n + 1])
    assert band.entry(0, 0) == pytest.approx(a[0] ** 2 + b[0] ** 2)
    assert band.entry(3, 6) == 0 and band.entry(-1, 0) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(5, 40), st.integers(0, 2 ** 32 - 1))
def test_corner_matches_truncated_product_integer(k, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(-9, 10, n + k)
    b = rng.integers(1, 10, n + k)
    assert np.array_equal(power_coeffs(a, b, k, n).corner(n), brute_force_power(a, b, k, n))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(5, 40), st.integers(0, 2 ** 32 - 1))
def test_corner_matches_truncated_product_float(k, n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=n + k), rng.uniform(0.3, 3, n + k)
    ref = brute_force_power(a, b, k, n)
    got = power_coeffs(a, b, k, n).corner(n)
    assert np.abs(got - ref).max() <= 1e-12 * np.abs(ref).max()


def test_integer_entries_stay_exact():
    # J^4 entries near 10^76 are beyond int64 and double precision
    n = np.arange(30)
    a = (n + 1) ** 4
    b = (n + 1) ** 4
    band = power_coeffs(a, b, 4, 20)
    assert isinstance(band.entry(20, 20), int)
    assert band.entry(20, 20) == brute_force_power(a, b, 4, 21)[20, 20]


def test_band_symmetry_and_outer_band():
    band = power_coeffs(np.ones(60), np.linspace(1, 3, 60), 3, 50)
    band.to_band_spec().check(45)
    dense = band.corner(40)
    np.testing.assert_array_equal(dense, dense.T)
    assert np.all(np.triu(dense, 4) == 0)


def test_rejects_bad_input():
    with pytest.raises(CoefficientError):
        power_coeffs(np.zeros(10), np.r_[1.0, 0.0, np.ones(8)], 2, 5)
    with pytest.raises(ValueError):
        power_coeffs(np.zeros(10), np.ones(10), 2, 20)
    with pytest.raises(ValueError):
        power_coeffs(np.zeros(10), np.ones(10), 0, 5)
    with pytest.raises(IndexError):
        power_coeffs(np.zeros(10), np.ones(10), 2, 5).entry(7, 7)


def test_accepts_coefficient_sequence():
    seq = make_family("power", {"a": 1, "b": 2, "alpha": 1, "beta": 1})
    n = np.arange(40)
    ref = power_coeffs(n + 1.0, 2 * (n + 1.0), 3, 30)
    got = power_coeffs(seq, None, 3, 30)
    np.testing.assert_allclose(got.corner(30), ref.corner(30))


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)])
def test_alternating_limit(a, b):
    n = np.arange(10010)
    v = k2_limsup((-1.0) ** n * a * (n + 1.0) ** 2, b * (n + 1.0) ** 2, 10000)
    assert v.partial_value == pytest.approx(2 * b ** 2 / (a ** 2 + 2 * b ** 2), abs=1e-3)


def test_k2_ratio_and_band_quantity_identity():
    # same numerator; the band quantity divides by sqrt(c_nn^2 + 1) instead of c_nn
    rng = np.random.default_rng(7)
    a = rng.normal(size=300) * 3
    b = rng.uniform(0.5, 3, 300)
    r = k2_ratios(a, b, 250)
    band = power_coeffs(a, b, 2, 260)
    q = band_quantities(band.to_band_spec(), 250)
    c = np.array([band.entry(n, n) for n in range(251)])
    np.testing.assert_allclose(r * c / np.sqrt(c ** 2 + 1), q, rtol=1e-12)


def test_k2_agrees_with_band_when_diagonal_large():
    n = np.arange(2100)
    a, b = (-1.0) ** n * (n + 1.0) ** 2, (n + 1.0) ** 2
    r = k2_ratios(a, b, 2000)
    q = band_quantities(power_coeffs(a, b, 2, 2010).to_band_spec(), 2000)
    assert np.abs(r - q)[10:].max() <= 1e-9


def test_zero_diagonal_limit_is_one():
    n = np.arange(5010)
    for alpha in (1.0, 2.0):
        r = k2_ratios(np.zeros(5010), (n + 1.0) ** alpha, 5000)
        assert r[-1] == pytest.approx(1.0, abs=1e-3)
        assert k2_limsup(np.zeros(5010), (n + 1.0) ** alpha, 5000).verdict == NO_CONCLUSION


def test_power_limsup_k1_is_band_limsup():
    n = np.arange(600)
    a, b = 10.0 + 0 * n, np.ones(600)
    v = power_limsup_criterion(a, b, 1, 500)
    seq = make_family("constant", {"a": 10, "b": 1})
    w = band_limsup(block_to_band(seq), 500)
    assert v.criterion_id == "power_limsup" and v.verdict == w.verdict == SELF_ADJOINT
    assert v.partial_value == pytest.approx(w.partial_value)


def test_power_limsup_example2():
    n = np.arange(3010)
    v = power_limsup_criterion((-1.0) ** n * (n + 1.0) ** 2, (n + 1.0) ** 2, 2, 3000)
    assert v.verdict == SELF_ADJOINT and v.partial_value == pytest.approx(2 / 3, abs=2e-3)


def test_consistency_probe_reports():
    n = np.arange(5000)
    r = power_consistency_probe(np.zeros(5000), (n + 1.0) ** 2, 2, 4000)
    assert (r.scalar, r.power_block, r.status) == ("indeterminate", "completely_indeterminate", "consistent")
    r = power_consistency_probe(np.zeros(5000), np.ones(5000), 2, 4000)
    assert (r.scalar, r.power_block, r.status) == ("determinate", "not_completely", "consistent")


def test_consistency_probe_k1_tautology():
    n = np.arange(3000)
    assert power_consistency_probe(np.zeros(3000), (n + 1.0) ** 2, 1, 2000).status == "consistent"
