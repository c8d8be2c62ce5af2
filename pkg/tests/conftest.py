import numpy as np
import pytest

from cqt.lattice import Subspace

S = 1 / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def ray(*amps):
    return Subspace.span([np.array(amps, dtype=complex)])


def assert_same(a, b, tol=1e-9):
    assert a.distance(b) <= tol, f"projector distance {a.distance(b):.3e}"
