import math

import numpy as np
import pytest

from eprsim import bloch, oracle
from eprsim.povm import random_povm, validate


def test_sic_joint(sic):
    p = oracle.joint(sic, sic).p
    assert np.allclose(np.diag(p), 1 / 8, atol=1e-12)
    assert np.allclose(p[~np.eye(4, dtype=bool)], 1 / 24, atol=1e-12)


def test_projective_joint(proj_z, proj_x):
    p = oracle.joint(proj_z, proj_z).p
    assert np.array_equal(p, [[0.5, 0.0], [0.0, 0.5]])

    p = oracle.joint(proj_z, proj_x).p
    assert np.allclose(p, 0.25, atol=1e-12)


def test_joint_properties_random_pairs(rng):
    for _ in range(1000):
        a = random_povm(int(rng.integers(2, 7)), rng)
        b = random_povm(int(rng.integers(2, 7)), rng)
        pj = oracle.joint(a, b)

        assert pj.shape == (a.n_outcomes, b.n_outcomes)
        assert np.all(pj.p >= 0.0)
        assert math.isclose(pj.p.sum(), 1.0, abs_tol=1e-9)
        assert np.allclose(pj.marginal_a(), oracle.marginal(a), atol=1e-9)
        assert np.allclose(pj.marginal_b(), oracle.marginal(b), atol=1e-9)

        # Swapping the parties transposes the table
        assert np.array_equal(oracle.joint(b, a).p, pj.p.T)


def test_correlation():
    z = np.array([0.0, 0.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    assert math.isclose(oracle.correlation(z, z), 1.0)
    assert math.isclose(oracle.correlation(z, -z), -1.0)
    assert math.isclose(oracle.correlation(z, x), 0.0, abs_tol=1e-15)


def test_chsh_values():
    assert math.isclose(oracle.chsh(*oracle.chsh_settings('optimal')), 2 * math.sqrt(2), rel_tol=1e-12)
    assert math.isclose(oracle.chsh(*oracle.chsh_settings('collinear')), 2.0, rel_tol=1e-12)
    with pytest.raises(ValueError):
        oracle.chsh_settings('bogus')


def test_chsh_tsirelson_bound(rng):
    dirs = bloch.sample_unit_vectors(rng, 4 * 1000).reshape(1000, 4, 3)
    for a, a_prime, b, b_prime in dirs:
        assert abs(oracle.chsh(a, a_prime, b, b_prime)) <= 2 * math.sqrt(2) + 1e-9


def test_joint_absorbs_input_tolerance():
    # Slightly incomplete POVM accepted at user tolerance still gives a normalized table
    a = random_povm(3, np.random.default_rng(1))
    b_elems = random_povm(4, np.random.default_rng(2)).elements * (1 + 4e-7)
    b = validate(b_elems, eps=1e-6)
    assert math.isclose(oracle.joint(a, b).p.sum(), 1.0, abs_tol=1e-12)
