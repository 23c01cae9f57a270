"""
Exact outcome distributions for POVM measurements on |phi+> = (|00> + |11>)/sqrt(2)

Pr[a=i]      = |a_i|/2
Pr[b=j]      = |b_j|/2
Pr[a=i, b=j] = (|a_i||b_j| + a_i.b_j)/4

These are the reference values the classical protocol has to reproduce.

DATES : 2026-10-17 From scratch
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bloch
from .povm import projective

# Numeric outcome assigned to POVM element 0 and 1 for correlations
OUTCOME_SIGNS = np.array([1.0, -1.0])

# Joint entries below this are rounding residue of exactly antiparallel element pairs
ZERO_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """
    Outcome pair probabilities p[i][j] (Alice outcome i, Bob outcome j)
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, 'p', p)

    @property
    def shape(self):
        return self.p.shape

    def marginal_a(self):
        return self.p.sum(axis=1)

    def marginal_b(self):
        return self.p.sum(axis=0)


def marginal(p):
    """
    Single-party outcome distribution |b_i|/2, renormalized to sum to 1

    :param p: Povm
    :return: ndarray (n,)
    """

    return p.probabilities


def joint(a, b):
    """
    Joint outcome distribution for Alice measuring POVM a and Bob measuring POVM b

    :param a: Povm
        Alice's POVM
    :param b: Povm
        Bob's POVM
    :return: JointDistribution
    """

    wa = a.weights
    wb = b.weights

    # a_i.b_j for every pair, built elementwise so joint(a, b) is the exact transpose of joint(b, a)
    dots = bloch.dot(a.elements[:, None, :], b.elements[None, :, :])
    p = (wa[:, None] * wb[None, :] + dots) / 4.0

    # Cauchy-Schwarz makes every entry non-negative; clear rounding residue at antipodal pairs
    p[p < ZERO_TOL] = 0.0

    # Closed-form total (1 for exact POVMs) absorbs the input tolerance and is symmetric in a, b
    total = (wa.sum() * wb.sum() + bloch.dot(a.elements.sum(axis=0), b.elements.sum(axis=0))) / 4.0

    return JointDistribution(p / total)


def correlation(a_dir, b_dir):
    """
    Expectation of the product of +1/-1 outcomes for projective measurements along a_dir and b_dir

    Element 0 of each projective POVM (the +axis) is assigned +1, element 1 is -1.
    Analytically this equals a_dir.b_dir.
    """

    pj = joint(projective(a_dir), projective(b_dir)).p

    return float(OUTCOME_SIGNS @ pj @ OUTCOME_SIGNS)


def chsh(a, a_prime, b, b_prime):
    """
    CHSH combination E(a,b) + E(a,b') + E(a',b) - E(a',b')
    """

    return (
        correlation(a, b)
        + correlation(a, b_prime)
        + correlation(a_prime, b)
        - correlation(a_prime, b_prime)
    )


def chsh_settings(kind='optimal'):
    """
    Measurement directions (a, a', b, b') for the CHSH experiment

    :param kind: str
        'optimal' - coplanar settings reaching 2 sqrt(2)
        'collinear' - all four along z, giving S = 2
    :return: tuple of four unit vectors
    """

    z = bloch.unit_vector(0.0, 0.0, 1.0)
    x = bloch.unit_vector(1.0, 0.0, 0.0)

    if kind == 'optimal':
        r = 1.0 / math.sqrt(2.0)
        return z, x, bloch.normalize(r * (z + x)), bloch.normalize(r * (z - x))

    if kind == 'collinear':
        return z, z, z, z

    raise ValueError(f'Unknown CHSH settings {kind!r}')
