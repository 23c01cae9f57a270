"""
POVM data model on the Bloch sphere
- rank-one qubit POVM elements B_i = (|b_i| I + b_i.sigma) / 2 stored as Bloch vectors b_i
- completeness checks (sum |b_i| = 2, sum b_i = 0)
- canonical constructors, random generator and JSON file format

DATES : 2026-10-17 From scratch
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import bloch

# Validation tolerances for user supplied and internally constructed POVMs
USER_EPS = 1e-6
INTERNAL_EPS = 1e-9

# Centered vectors shorter than this trigger a redraw in random_povm()
DEGENERATE_NORM = 1e-9


class PovmError(ValueError):
    """Base class for POVM construction and validation failures"""


class PovmParseError(PovmError):
    pass


class TooFewElements(PovmError):

    def __init__(self, n_elements):
        super().__init__(f'POVM needs at least 2 elements, got {n_elements}')
        self.n_elements = n_elements


class CompletenessViolation(PovmError):
    """A completeness condition failed by more than eps"""

    condition = ''

    def __init__(self, deviation, eps):
        super().__init__(
            f'{self.condition} violated: deviation {deviation:.3e} exceeds tolerance {eps:.3e}'
        )
        self.deviation = deviation
        self.eps = eps


class WeightSumViolation(CompletenessViolation):
    condition = 'sum |b_i| = 2'


class VectorSumViolation(CompletenessViolation):
    condition = 'sum b_i = 0'


@dataclass(frozen=True, eq=False)
class Povm:
    """
    Validated POVM as an immutable (n, 3) array of Bloch vectors

    Build with validate() or one of the constructors, never directly from
    unchecked input.
    """

    elements: np.ndarray

    def __post_init__(self):
        elements = np.array(self.elements, dtype=np.float64)
        elements.setflags(write=False)
        object.__setattr__(self, 'elements', elements)

    @property
    def n_outcomes(self):
        return self.elements.shape[0]

    @property
    def weights(self):
        """Outcome weights |b_i|"""
        return np.linalg.norm(self.elements, axis=1)

    @property
    def probabilities(self):
        """Outcome probabilities |b_i|/2, renormalized to sum exactly 1"""
        w = self.weights
        return w / w.sum()

    def __len__(self):
        return self.n_outcomes

    def __eq__(self, other):
        if not isinstance(other, Povm):
            return NotImplemented
        return self.elements.shape == other.elements.shape and bool(
            np.array_equal(self.elements, other.elements)
        )

    def __hash__(self):
        return hash(self.elements.tobytes())

    def __repr__(self):
        return f'Povm({self.elements.tolist()})'


def validate(elements, eps=USER_EPS):
    """
    Check the completeness conditions and return a Povm

    :param elements: array-like (n, 3)
        Candidate Bloch vectors
    :param eps: float
        Tolerance on both completeness conditions
    :return: Povm
    """

    if eps <= 0:
        raise ValueError(f'Validation tolerance must be positive, got {eps}')

    b = np.asarray(elements, dtype=np.float64)
    if b.ndim != 2 or b.shape[1] != 3:
        raise PovmParseError(f'POVM elements must be an (n, 3) array, got shape {b.shape}')

    if b.shape[0] < 2:
        raise TooFewElements(b.shape[0])

    if not np.all(np.isfinite(b)):
        raise PovmParseError('POVM elements must be finite')

    # First condition - outcome weights sum to 2
    weight_dev = abs(float(np.linalg.norm(b, axis=1).sum()) - 2.0)
    if weight_dev > eps:
        raise WeightSumViolation(weight_dev, eps)

    # Second condition - Bloch vectors sum to zero
    vector_dev = float(np.linalg.norm(b.sum(axis=0)))
    if vector_dev > eps:
        raise VectorSumViolation(vector_dev, eps)

    return Povm(b)


def projective(n):
    """
    Two-outcome projective measurement along unit axis n
    """

    n = np.asarray(n, dtype=np.float64)

    return validate(np.stack([n, -n]), eps=INTERNAL_EPS)


def sic_tetrahedron():
    """
    Symmetric informationally complete POVM with tetrahedral Bloch vectors of length 1/2
    """

    t = np.array([
        [1, 1, 1],
        [1, -1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
    ], dtype=np.float64) / math.sqrt(3.0)

    return validate(t / 2.0, eps=INTERNAL_EPS)


def random_povm(n, rng):
    """
    Random n-outcome POVM

    Draw n uniform unit vectors, subtract their mean so they sum to zero and
    rescale so the lengths sum to 2. Both completeness conditions then hold
    by construction.

    :param n: int
        Number of outcomes (>= 2)
    :param rng: numpy Generator
    :return: Povm
    """

    if n < 2:
        raise TooFewElements(n)

    while True:
        u = bloch.sample_unit_vectors(rng, n)
        b = u - u.mean(axis=0)
        norms = np.linalg.norm(b, axis=1)
        if np.all(norms >= DEGENERATE_NORM):
            break

    b *= 2.0 / norms.sum()

    return validate(b, eps=INTERNAL_EPS)


def rotate_povm(p, rotvec):
    """
    Apply a fixed rotation to every element of a POVM
    """

    return validate(bloch.rotate(p.elements, rotvec), eps=INTERNAL_EPS)


def read_povm(text, eps=USER_EPS):
    """
    Parse and validate a POVM from JSON text

    :param text: str
        JSON array of n >= 2 arrays of exactly 3 finite numbers
    :param eps: float
        Completeness tolerance
    :return: Povm
    """

    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError) as err:
        raise PovmParseError(f'POVM text is not valid JSON: {err}') from err

    if not isinstance(data, list):
        raise PovmParseError('POVM must be a JSON array of 3-element arrays')

    for k, row in enumerate(data):
        if not isinstance(row, list) or len(row) != 3:
            raise PovmParseError(f'POVM element {k} is not an array of 3 numbers')
        for x in row:
            # bool is an int subclass in Python but not a JSON number
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise PovmParseError(f'POVM element {k} contains a non-numeric value {x!r}')
            try:
                finite = math.isfinite(float(x))
            except OverflowError:
                finite = False
            if not finite:
                raise PovmParseError(f'POVM element {k} contains a non-finite value {x!r}')

    if len(data) < 2:
        raise TooFewElements(len(data))

    return validate(np.array(data, dtype=np.float64), eps=eps)


def write_povm(p):
    """
    Serialize a POVM as a JSON array of triples

    Floats are written with repr() precision so read_povm(write_povm(p)) == p.
    """

    return json.dumps(p.elements.tolist())


def load_povm(fname, eps=USER_EPS):
    try:
        with open(fname, 'r', encoding='utf-8') as fd:
            text = fd.read()
    except UnicodeDecodeError as err:
        raise PovmParseError(f'{fname} is not UTF-8 text: {err}') from err

    return read_povm(text, eps=eps)


def save_povm(p, fname):
    with open(fname, 'w', encoding='utf-8') as fd:
        fd.write(write_povm(p))
        fd.write('\n')
