import numpy as np
import pytest

from fpspec import model as fm
from fpspec.hermite import CoeffVector, enumerate_indices


@pytest.fixture
def ou():
    return fm.ou(2)


@pytest.fixture
def kinetic():
    return fm.kinetic()


@pytest.fixture
def defective():
    return fm.defective()


TEST_MODELS = {"ou": fm.ou, "kinetic": fm.kinetic, "defective": fm.defective}


@pytest.fixture(params=sorted(TEST_MODELS))
def any_model(request):
    return TEST_MODELS[request.param]()


def random_coeffs(rng, d, max_order, min_order=1, mass=1.0):
    coeffs = {(0,) * d: mass}
    for k in range(min_order, max_order + 1):
        for a in enumerate_indices(d, k):
            coeffs[a] = rng.normal()
    return CoeffVector(coeffs, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)
