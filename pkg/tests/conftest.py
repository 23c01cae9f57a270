"""
Shared pytest fixtures
"""

import os

# Keep nipype from phoning home during workflow tests
os.environ.setdefault('NIPYPE_NO_ET', '1')

import numpy as np
import pytest

from eprsim.povm import projective, random_povm, sic_tetrahedron


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


@pytest.fixture
def proj_z():
    return projective([0.0, 0.0, 1.0])


@pytest.fixture
def proj_x():
    return projective([1.0, 0.0, 0.0])


@pytest.fixture
def sic():
    return sic_tetrahedron()


@pytest.fixture
def random_pair():
    pair_rng = np.random.default_rng(4)
    return random_povm(4, pair_rng), random_povm(4, pair_rng)


@pytest.fixture(autouse=True)
def _reset_nipype_log_streams():
    # main() points nipype's console handlers at the current sys.stderr; under
    # capsys that stream is closed after the test, so detach it again
    yield
    import logging
    import sys
    for hdlr in logging.getLogger('nipype').handlers:
        if type(hdlr) is logging.StreamHandler:
            hdlr.stream = sys.__stderr__
