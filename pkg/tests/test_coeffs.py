import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_deficiency.coeffs import (BandSpec, BlockPair, CoefficientError, band_to_block, block_to_band,
                                      make_family, random_blocks, read_block_table,
                                      scalar_sequence)


def test_power_family_value():
    seq = make_family("power", {"a": 0, "b": 1, "alpha": 2})
    assert seq.b(5)[0, 0] == 36
    assert seq.a(5)[0, 0] == 0


def test_constant_family():
    seq = make_family("constant", {"a": 0, "b": 1})
    for j in (0, 7, 1000):
        assert seq.a(j)[0, 0] == 0 and seq.b(j)[0, 0] == 1


def test_alternating_power_signs():
    seq = make_family("alternating_power", {"a": 2, "b": 3, "alpha": 2})
    assert seq.a(0)[0, 0] == 2 and seq.a(1)[0, 0] == -8
    assert seq.b(2)[0, 0] == 27


def test_b_minus_one_is_zero():
    seq = make_family("example1", {"p": 1, "m": 3})
    assert np.all(seq.b(-1) == 0) and seq.b(-1).shape == (3, 3)


def test_blocks_memoised():
    seq = make_family("power", {"b": 1, "alpha": 1})
    assert seq.block(4) is seq.block(4)


def _explicit_example1(p, m, n):
    # J_p + J_m built independently from the two band descriptions
    out = np.zeros((n, n))
    for j in range(n):
        if j + p < n:
            out[j, j + p] = out[j + p, j] = (j + 1) ** 2
        if j + m < n:
            out[j, j + m] += 1
            out[j + m, j] += 1
    return out


@pytest.mark.parametrize("p,m", [(1, 2), (1, 3), (2, 3), (3, 5)])
def test_example1_matches_explicit_band_sum(p, m):
    seq = make_family("example1", {"p": p, "m": m})
    n_blocks = 50 // m
    dense = seq.expand(n_blocks)
    np.testing.assert_array_equal(dense, _explicit_example1(p, m, n_blocks * m))


def test_example1_blocks_p1_m2():
    seq = make_family("example1", {"p": 1, "m": 2})
    for k in range(5):
        np.testing.assert_array_equal(seq.a(k), [[0, (2 * k + 1) ** 2], [(2 * k + 1) ** 2, 0]])
        np.testing.assert_array_equal(seq.b(k), [[1, 0], [(2 * k + 2) ** 2, 1]])


def test_example1_stays_valid_deep():
    # B_j is unit lower triangular: invertible however large (2j+2)^2 gets
    seq = make_family("example1", {"p": 1, "m": 2})
    seq.check(2000)


@pytest.mark.parametrize("tag,params", [
    ("nope", {}),
    ("power", {"b": 0}),
    ("power", {"b": -1}),
    ("constant", {"a": 0, "b": -2}),
    ("alternating_power", {"b": 0}),
    ("example1", {"p": 2, "m": 2}),
    ("example1", {"p": 0, "m": 2}),
    ("table", {"blocks": []}),
])
def test_family_errors(tag, params):
    with pytest.raises(CoefficientError):
        make_family(tag, params)


def test_blockpair_rejects_non_hermitian_and_singular():
    with pytest.raises(CoefficientError, match="self-adjoint"):
        BlockPair(np.array([[0, 1], [2, 0]]), np.eye(2), 3)
    with pytest.raises(CoefficientError, match="B_4") as info:
        BlockPair(np.zeros((2, 2)), np.array([[1, 1], [1, 1]]), 4)
    assert info.value.index == 4


def test_table_family_length():
    seq = scalar_sequence([0, 0, 0], [1, 2, 3])
    assert seq.b(2)[0, 0] == 3
    with pytest.raises(IndexError):
        seq.block(3)


def test_scalar_band_is_tridiagonal():
    spec = BandSpec(1, lambda i, j: 5.0 if i == j else float(min(i, j) + 1))
    seq = band_to_block(spec)
    assert seq.block_size == 1
    assert seq.a(3)[0, 0] == 5 and seq.b(3)[0, 0] == 4


def test_zero_outer_band_rejected():
    spec = BandSpec(2, lambda i, j: 0.0 if abs(i - j) == 2 and min(i, j) == 3 else 1.0)
    seq = band_to_block(spec)
    seq.block(0)
    with pytest.raises(CoefficientError, match="outer band"):
        seq.block(1)
    with pytest.raises(CoefficientError):
        spec.check(5)


@st.composite
def bands(draw):
    m = draw(st.integers(1, 4))
    n = 6 * m + m
    vals = draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=n * (m + 1), max_size=n * (m + 1)))
    table = np.array(vals).reshape(n, m + 1)
    table[:, m] = np.where(np.abs(table[:, m]) < 0.1, 1.0, table[:, m])

    def entry(i, j):
        lo, d = min(i, j), abs(i - j)
        return table[lo, d]

    return BandSpec(m, entry)


@settings(max_examples=40, deadline=None)
@given(bands())
def test_band_block_round_trip(spec):
    m = spec.bandwidth
    seq = band_to_block(spec)
    back = block_to_band(seq)
    for i in range(5 * m):
        for j in range(max(0, i - m - 1), i + m + 2):
            assert back(i, j) == spec(i, j)
    np.testing.assert_array_equal(seq.expand(5), spec.dense(5 * m))


def test_random_blocks_singular_values(rng):
    seq = random_blocks(3, 20, rng, sv_range=(0.5, 2.0))
    for j in range(20):
        s = np.linalg.svd(seq.b(j), compute_uv=False)
        assert 0.5 - 1e-12 <= s.min() and s.max() <= 2.0 + 1e-12
        np.testing.assert_allclose(seq.a(j), seq.a(j).conj().T)


def test_read_block_table(tmp_path):
    path = tmp_path / "blocks.txt"
    path.write_text("# A_0\n0 1+i\n1-i 0\n\n# B_0\n1 0\n2 1\n\n1 0\n0 -1\n\n2i 0\n0 1e3\n")
    pairs = read_block_table(path)
    assert len(pairs) == 2
    np.testing.assert_array_equal(pairs[0][0], [[0, 1 + 1j], [1 - 1j, 0]])
    np.testing.assert_array_equal(pairs[1][1], [[2j, 0], [0, 1000]])
    seq = make_family("table", {"path": path})
    assert seq.length == 2 and seq.family_tag[0] == "table"


@pytest.mark.parametrize("text,match", [
    ("1\n\n2\n\n3\n", "odd"),
    ("1 2\n3\n\n1\n", "square"),
    ("1 x\n2 3\n\n1 0\n0 1\n", "complex"),
    ("# nothing\n", "no blocks"),
    ("1\n\n1 0\n0 1\n", "sizes"),
])
def test_read_block_table_errors(tmp_path, text, match):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(CoefficientError, match=match):
        read_block_table(path)
