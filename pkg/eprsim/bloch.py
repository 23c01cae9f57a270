"""
Bloch sphere geometry
- unit vectors, inner products and uniform sampling on S2
- Heaviside step and sign functions used to build protocol messages

All vectors are float64 numpy arrays with a trailing axis of length 3, so
every function works on a single vector or on a stack of vectors.

DATES : 2026-10-17 From scratch
"""

import numpy as np
from scipy.spatial.transform import Rotation

# Tolerance on the unit norm at construction
UNIT_TOL = 1e-12


def vec3(x, y, z):
    """
    Construct a finite 3-vector

    :param x: float
    :param y: float
    :param z: float
    :return: v, ndarray (3,)
    """

    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f'Vector components must be finite, got {v}')

    return v


def unit_vector(x, y, z):
    """
    Construct a unit 3-vector, checking the norm rather than normalizing
    """

    v = vec3(x, y, z)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f'Vector {v} is not unit length (norm {norm!r})')

    return v


def normalize(v):
    """
    Scale a nonzero vector (or stack of vectors) to unit length
    """

    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise ValueError('Cannot normalize a zero vector')

    return v / norm


def theta(x):
    """
    Heaviside step as a bit: 1 if x >= 0 else 0

    (-1)**theta(-x) equals sgn(x) for x != 0. At x = 0 it gives -1.

    :param x: float or ndarray
    :return: int for scalar input, uint8 ndarray otherwise
    """

    bits = (np.asarray(x) >= 0).astype(np.uint8)
    if bits.ndim == 0:
        return int(bits)

    return bits


def sgn(x):
    """
    Sign with sgn(0) = +1, so sgn(x) == 1 exactly when theta(x) == 1
    """

    s = np.where(np.asarray(x) >= 0, 1, -1)
    if s.ndim == 0:
        return int(s)

    return s


def dot(u, v):
    """
    Inner product along the last axis

    :param u: ndarray (..., 3)
    :param v: ndarray (..., 3)
    :return: float or ndarray (...)
    """

    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)

    # Explicit component sum keeps dot(u, v) == dot(v, u) bit for bit
    d = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2]
    if np.ndim(d) == 0:
        return float(d)

    return d


def sample_unit_vectors(rng, n):
    """
    Draw n directions uniformly distributed on the unit sphere

    Each direction is a triple of independent standard normal deviates
    scaled to unit length. Rows with zero norm are redrawn in place.

    :param rng: numpy Generator
    :param n: int
        Number of vectors
    :return: ndarray (n, 3)
    """

    g = rng.standard_normal((n, 3))
    norm = np.linalg.norm(g, axis=1)

    # Zero vector has probability zero but would poison the division
    bad = norm == 0.0
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), 3))
        norm[bad] = np.linalg.norm(g[bad], axis=1)
        bad = norm == 0.0

    return g / norm[:, None]


def sample_unit_vector(rng):
    """
    Draw a single direction uniformly distributed on the unit sphere
    """

    return sample_unit_vectors(rng, 1)[0]


def signed_combination(c, d, v1, v2):
    """
    Compute (-1)^c v1 + (-1)^d v2

    :param c: int or ndarray of bits
    :param d: int or ndarray of bits
    :param v1: ndarray (..., 3)
    :param v2: ndarray (..., 3)
    :return: ndarray (..., 3)
    """

    sc = 1 - 2 * np.asarray(c, dtype=np.int64)
    sd = 1 - 2 * np.asarray(d, dtype=np.int64)

    return sc[..., None] * np.asarray(v1) + sd[..., None] * np.asarray(v2)


def angle_between(u, v):
    """
    Angle in radians between unit vectors, robust to rounding outside [-1, 1]
    """

    return np.arccos(np.clip(dot(u, v), -1.0, 1.0))


def rotate(vectors, rotvec):
    """
    Apply a fixed rotation to one vector or a stack of vectors

    :param vectors: ndarray (3,) or (n, 3)
    :param rotvec: array-like (3,)
        Rotation vector (axis times angle in radians)
    :return: ndarray, same shape as vectors
    """

    return Rotation.from_rotvec(rotvec).apply(np.asarray(vectors, dtype=np.float64))
