import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wstar import catalog
from wstar.model import build_model
from wstar.modular import ModularCalculus

settings.register_profile("wstar", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("wstar")


def calculus(recipe):
    model, constants = catalog.build_recipe(recipe)
    return ModularCalculus(model), constants


@pytest.fixture(scope="session")
def tracial2():
    return ModularCalculus(build_model(eigenvalues=[0.5, 0.5]))


@pytest.fixture(scope="session")
def p23():
    return ModularCalculus(build_model(eigenvalues=[2 / 3, 1 / 3]))


@pytest.fixture(scope="session")
def nondiag():
    rho = np.array([[0.6, 0.1 + 0.1j], [0.1 - 0.1j, 0.4]])
    return ModularCalculus(build_model(matrix=rho))


@pytest.fixture(scope="session")
def periodic_half():
    return calculus(catalog.periodic(0.5, 4))


@pytest.fixture(scope="session")
def geo13():
    return calculus(catalog.geometric_truncation(1, 3))


def unit(d, i, j):
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def random_op(rng, d, m=1.0):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return x * (m / np.linalg.norm(x, 2))


def random_model(rng, d, diagonal=True):
    p = rng.uniform(0.05, 1.0, size=d)
    p /= p.sum()
    if diagonal:
        return build_model(eigenvalues=p)
    q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return build_model(matrix=(q * p) @ q.conj().T)
