import os
from fractions import Fraction

import hypothesis
import pytest

from app.models.models import TorusPoint, TorusPointSet

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None, derandomize=True)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def quarter_set() -> TorusPointSet:
    """{0, 1/4, 1/2, 3/4} en T^1."""
    return TorusPointSet.exact([[Fraction(i, 4)] for i in range(4)])


@pytest.fixture
def origin_1d() -> TorusPointSet:
    return TorusPointSet.exact([[0]])


@pytest.fixture
def grid_5x5() -> TorusPointSet:
    return TorusPointSet.exact([[Fraction(i, 5), Fraction(j, 5)] for i in range(5) for j in range(5)])


def exact_point(*coords) -> TorusPoint:
    return TorusPoint.exact([Fraction(c) for c in coords])
