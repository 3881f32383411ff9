import numpy as np
import pytest

from artifact import RadialPotential, build_metric, radial_rule


@pytest.fixture(scope="session")
def rule200():
    return radial_rule(200)


@pytest.fixture(scope="session")
def fs_metric(rule200):
    cache = {}

    def make(n):
        if n not in cache:
            cache[n] = build_metric(RadialPotential(n, (0.0,)), rule200)
        return cache[n]

    return make


def random_potential(rng, n, scale=0.12, terms=4):
    coeffs = rng.normal(0.0, scale, size=terms)
    coeffs[0] = 0.0
    return RadialPotential(n, tuple(coeffs))


def random_metric(rng, n, rule, scale=0.12, terms=4):
    return build_metric(random_potential(rng, n, scale, terms), rule)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
