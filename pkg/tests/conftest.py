import numpy as np
import pytest

from ssprk import ButcherTableau, load_bundled, shu_osher_to_butcher


@pytest.fixture(scope="session")
def ssprk33():
    return load_bundled("ssprk33")


@pytest.fixture(scope="session")
def forward_euler():
    return load_bundled("forward-euler")


@pytest.fixture(scope="session")
def implicit_midpoint():
    return load_bundled("implicit-midpoint")


@pytest.fixture(scope="session")
def ketcheson104():
    return load_bundled("ketcheson-ssprk104")


@pytest.fixture(scope="session")
def dirk646():
    return load_bundled("dirk-s6-p4-plin6")


@pytest.fixture(scope="session")
def dirk646_butcher(dirk646):
    return shu_osher_to_butcher(dirk646)


def random_dirk(rng, s, lo=-2.0, hi=2.0, max_cond=1e4):
    """Random lower-triangular tableau with a tame coupling matrix."""
    while True:
        A = np.tril(rng.uniform(lo, hi, size=(s, s)))
        b = rng.uniform(lo, hi, size=s)
        if np.linalg.cond(np.eye(s) + A) < max_cond:
            return ButcherTableau(A, b)
