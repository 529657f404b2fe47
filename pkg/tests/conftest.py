import cmath

import numpy as np
import pytest

from bpsdeform.cpoly import Poly
from bpsdeform.hyperelliptic import Curve


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sextic():
    """y^2 = x^6 - 1, genus 2."""
    return Curve(Poly([-1, 0, 0, 0, 0, 0, 1]))


@pytest.fixture
def roots_of_unity_curve():
    def make(g):
        n = 2 * g + 2
        return Curve.from_roots([cmath.exp(2j * cmath.pi * k / n) for k in range(n)])
    return make
