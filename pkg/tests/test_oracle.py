import numpy as np
import pytest

from jacobi_deficiency.coeffs import make_family, random_blocks
from jacobi_deficiency.oracle import (NON_SUMMABLE, SUMMABLE, _gram_double, _gram_mp, checkpoint_grid,
                                      complete_indeterminacy_probe, deficiency_estimate, log10_growth,
                                      scalar_indeterminacy, summability_probe)
from jacobi_deficiency.polys import first_kind


def test_checkpoint_grid():
    assert checkpoint_grid(100) == [16, 32, 64, 100]
    assert checkpoint_grid(64) == [16, 32, 64]


def test_summability_partial_sums_monotone(battery):
    for key in ("a", "b", "c"):
        for col in summability_probe(battery[key], 1j, "first", 4000):
            sums = np.array(col.partial_sums)
            assert np.all(sums[1:] >= sums[:-1])  # inf >= inf holds after overflow


def test_probe_preconditions(battery):
    with pytest.raises(ValueError):
        summability_probe(battery["a"], 1j, "third", 100)
    with pytest.raises(ValueError):
        summability_probe(battery["a"], 1j, "first", 8)
    with pytest.raises(ValueError):
        deficiency_estimate(battery["a"], 32)


def test_scalar_quadratic_is_indeterminate(battery):
    assert scalar_indeterminacy(battery["b"], 10000) == "indeterminate"
    assert complete_indeterminacy_probe(battery["b"], 10000) == "completely_indeterminate"
    est = deficiency_estimate(battery["b"], 10000)
    assert est.n_plus_estimate == 1 and not est.inconclusive


def test_scalar_constant_is_determinate():
    seq = make_family("constant", {"a": 0, "b": 1})
    assert complete_indeterminacy_probe(seq, 4000) == "not_completely"
    est = deficiency_estimate(seq, 4000)
    assert est.n_plus_estimate == 0
    assert "overflow" in est.note


def test_linear_growth_not_summable(battery):
    cols = summability_probe(battery["a"], 1j, "first", 10000)
    assert cols[0].trend == NON_SUMMABLE and not cols[0].overflow_flag


def test_example1_estimate(battery):
    est = deficiency_estimate(battery["d"], 256)
    assert est.n_plus_estimate == 1
    assert sorted(est.direction_trends) == [NON_SUMMABLE, SUMMABLE]
    assert est.precision.startswith("mpmath")
    assert complete_indeterminacy_probe(battery["d"], 256) == "not_completely"


def test_gram_monotone_and_bounds(battery):
    est = deficiency_estimate(battery["d"], 128)
    traj = np.array(est.trajectories)
    assert np.all(np.diff(traj, axis=0) >= -1e-9)
    assert 0 <= est.n_plus_estimate <= 2


def test_mp_and_double_gram_agree(rng):
    seq = random_blocks(2, 80, rng, sv_range=(0.9, 1.1))
    grid = checkpoint_grid(64, first=8)
    P = first_kind(seq, 1j, 64)
    d = _gram_double(P.blocks, grid)
    mp = _gram_mp(seq, 64, grid, 30)
    np.testing.assert_allclose(d, mp, atol=1e-8)


def test_log10_growth_matches_direct(rng):
    seq = random_blocks(2, 100, rng)
    P = first_kind(seq, 1j, 90)
    direct = np.log10(np.linalg.norm(P.blocks, ord=2, axis=(1, 2)))
    np.testing.assert_allclose(log10_growth(seq, 1j, 90), direct, atol=1e-9)


def test_random_bounded_blocks_have_estimate_zero(rng):
    # bounded coefficients give a self-adjoint operator (index (0, 0))
    seq = random_blocks(2, 2100, rng, sv_range=(0.5, 2.0))
    est = deficiency_estimate(seq, 2000)
    assert est.n_plus_estimate == 0


def test_estimate_dict(battery):
    d = deficiency_estimate(battery["b"], 1000).as_dict()
    assert set(d) >= {"n_plus_estimate", "log10_gram_eigenvalues", "direction_trends", "classifier"}
