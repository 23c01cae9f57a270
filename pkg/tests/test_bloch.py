import math

import numpy as np
import pytest

from eprsim import bloch


def test_vec3_rejects_non_finite():
    with pytest.raises(ValueError):
        bloch.vec3(0.0, math.nan, 1.0)
    with pytest.raises(ValueError):
        bloch.vec3(math.inf, 0.0, 0.0)


def test_unit_vector_checks_norm():
    v = bloch.unit_vector(0.0, 0.6, 0.8)
    assert np.allclose(v, [0.0, 0.6, 0.8])
    with pytest.raises(ValueError):
        bloch.unit_vector(1.0, 1.0, 0.0)


def test_normalize_zero_vector():
    with pytest.raises(ValueError):
        bloch.normalize([0.0, 0.0, 0.0])


def test_theta_and_sgn_ties():
    assert bloch.theta(0.0) == 1
    assert bloch.theta(-0.0) == 1
    assert bloch.theta(-1e-300) == 0
    assert bloch.sgn(0.0) == 1
    assert bloch.sgn(-2.0) == -1
    assert bloch.theta(np.array([-1.0, 0.0, 1.0])).tolist() == [0, 1, 1]

    # (-1)^theta(-x) == sgn(x) away from the tie
    x = np.array([-3.0, -1e-12, 1e-12, 5.0])
    assert np.array_equal((-1) ** bloch.theta(-x).astype(np.int64), bloch.sgn(x))
    assert (-1) ** bloch.theta(-0.0) == -1

    # sgn and theta agree on the tie
    x = np.array([-3.0, 0.0, 5.0])
    assert np.array_equal(bloch.sgn(x) == 1, bloch.theta(x) == 1)


def test_dot_is_symmetric(rng):
    u = bloch.sample_unit_vectors(rng, 1000)
    v = bloch.sample_unit_vectors(rng, 1000)
    assert np.array_equal(bloch.dot(u, v), bloch.dot(v, u))
    assert isinstance(bloch.dot(u[0], v[0]), float)


def test_sampled_vectors_are_unit(rng):
    v = bloch.sample_unit_vectors(rng, 10_000)
    assert v.shape == (10_000, 3)
    assert np.all(np.abs(np.linalg.norm(v, axis=1) - 1.0) <= 1e-12)
    assert bloch.sample_unit_vector(rng).shape == (3,)


@pytest.mark.slow
def test_sampled_vectors_are_uniform(rng):
    n = 1_000_000
    v = bloch.sample_unit_vectors(rng, n)

    assert np.all(np.abs(v.mean(axis=0)) <= 0.005)
    assert 0.330 <= float(np.mean(v[:, 2] ** 2)) <= 0.337

    # Octant counts within 5 binomial sigma of n/8
    octant = (v[:, 0] >= 0) * 4 + (v[:, 1] >= 0) * 2 + (v[:, 2] >= 0)
    counts = np.bincount(octant, minlength=8)
    sigma = math.sqrt(n * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - n / 8) <= 5 * sigma)


def test_signed_combination():
    z = np.array([0.0, 0.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    assert np.allclose(bloch.signed_combination(0, 0, z, x), [1.0, 0.0, 1.0])
    assert np.allclose(bloch.signed_combination(1, 0, z, x), [1.0, 0.0, -1.0])
    assert np.allclose(bloch.signed_combination(1, 1, z, x), [-1.0, 0.0, -1.0])

    c = np.array([0, 1], dtype=np.uint8)
    d = np.array([1, 1], dtype=np.uint8)
    w = bloch.signed_combination(c, d, np.stack([z, z]), np.stack([x, x]))
    assert np.allclose(w, [[-1.0, 0.0, 1.0], [-1.0, 0.0, -1.0]])


def test_angle_between():
    z = np.array([0.0, 0.0, 1.0])
    assert bloch.angle_between(z, z) == 0.0
    assert math.isclose(bloch.angle_between(z, -z), math.pi)
    assert math.isclose(bloch.angle_between(z, [1.0, 0.0, 0.0]), math.pi / 2)


def test_rotate_preserves_dot_products(rng):
    u = bloch.sample_unit_vectors(rng, 100)
    v = bloch.sample_unit_vectors(rng, 100)
    rotvec = rng.standard_normal(3)
    assert np.allclose(bloch.dot(bloch.rotate(u, rotvec), bloch.rotate(v, rotvec)), bloch.dot(u, v), atol=1e-14)
