import numpy as np
import pytest

from ppa import FitConfig, data, fit


def nonlinear_tabular(dims: int, n: int, seed: int) -> np.ndarray:
    """Tabular-style synthetic data with curved dependencies between columns."""
    rng = np.random.default_rng(seed)
    latent = rng.standard_normal((3, n))
    X = np.empty((dims, n))
    for i in range(dims):
        w = rng.normal(size=3)
        X[i] = (
            w @ latent
            + 0.6 * np.sin(latent[i % 3] * (1 + i % 4))
            + 0.4 * latent[(i + 1) % 3] ** 2
            + 0.1 * rng.standard_normal(n)
        )
    return X


def two_parabola_classes(n_per: int, seed: int, kappa=1.0, sigma=0.1, offset=0.4):
    """Two vertically offset noisy parabola classes and their labels."""
    a = data.gen_parabola2d(kappa, sigma, n_per, seed=seed, offset=0.0)
    b = data.gen_parabola2d(kappa, sigma, n_per, seed=seed + 1, offset=offset)
    return np.hstack([a, b]), np.array([0] * n_per + [1] * n_per)


@pytest.fixture(scope="session")
def helix_data():
    return data.gen_helix3d(2.0, 0.8, 0.1, 2000, seed=1)


@pytest.fixture(scope="session")
def helix_model(helix_data):
    return fit(helix_data, FitConfig(degree_range=(1, 16), seed=2))


@pytest.fixture(scope="session")
def parabola_data():
    return data.gen_parabola2d(1.0, 0.05, 1000, seed=3)


@pytest.fixture(scope="session")
def parabola_model(parabola_data):
    return fit(parabola_data, FitConfig(degree_range=(1, 5), seed=4))


@pytest.fixture(scope="session")
def gauss5_data():
    rng = np.random.default_rng(5)
    mix = rng.normal(size=(5, 5))
    return mix @ rng.standard_normal((5, 600))


@pytest.fixture(scope="session")
def gauss5_pca_model(gauss5_data):
    return fit(gauss5_data, FitConfig(degree=1))


@pytest.fixture(scope="session")
def tabular10_data():
    return nonlinear_tabular(10, 800, seed=6)


@pytest.fixture(scope="session")
def tabular10_model(tabular10_data):
    return fit(tabular10_data, FitConfig(degree_range=(1, 4), seed=7))
