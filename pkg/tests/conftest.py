import numpy as np
import pytest

from relinv.little_group import FourMomentum, LorentzTransform


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_lorentz(rng, max_rapidity=2.0):
    axis = rng.normal(size=3)
    rot = LorentzTransform.rotation(axis, rng.uniform(0, 2 * np.pi))
    baxis = rng.normal(size=3)
    return LorentzTransform.boost(rng.uniform(-max_rapidity, max_rapidity), baxis) @ rot


def random_massive(rng, mass=None):
    mass = rng.uniform(0.5, 2.0) if mass is None else mass
    return FourMomentum.massive(mass, rng.normal(size=3))


def random_massless(rng):
    return FourMomentum.massless(rng.normal(size=3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
