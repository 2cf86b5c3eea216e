"""Shared domains and fields; session scope keeps grid caches warm."""

import numpy as np
import pytest

from bmotrace.fields import random_scalar_field, random_vector_field
from bmotrace.grids import build_domain


@pytest.fixture(scope="session")
def disk32():
    return build_domain({"type": "disk"}, 1 / 32)


@pytest.fixture(scope="session")
def disk64():
    return build_domain({"type": "disk"}, 1 / 64)


@pytest.fixture(scope="session")
def square32():
    return build_domain({"type": "square", "params": {"side": 1.0}}, 1 / 32)


@pytest.fixture(scope="session")
def strip32():
    return build_domain({"type": "halfspace",
                         "params": {"width": 2.0, "height": 1.0}}, 1 / 32)


@pytest.fixture(scope="session")
def annulus32():
    return build_domain({"type": "annulus",
                         "params": {"r_inner": 0.4, "r_outer": 1.0}}, 1 / 32)


@pytest.fixture
def scalar_on():
    def make(dom, seed=0):
        f = random_scalar_field(dom.grid, seed=seed)
        return np.where(dom.mask, f, 0.0)
    return make


@pytest.fixture
def vector_on():
    def make(dom, seed=0):
        return random_vector_field(dom.grid, seed=seed)
    return make
