import numpy as np
import pytest

from cvinfer import datasets
from cvinfer.model import Dataset, ParamVector


@pytest.fixture(scope="session")
def hospital():
    return datasets.hospital()


@pytest.fixture(scope="session")
def blood_rbc():
    return datasets.blood("rbc")


def random_dataset(rng, k=None, n_max=12):
    k = k or int(rng.integers(1, 6))
    n = rng.integers(2, n_max, size=k)
    mu = rng.uniform(0.5, 20.0, size=k)
    tau = rng.uniform(0.05, 0.4)
    groups = [m + tau * m * rng.standard_normal(ni) for m, ni in zip(mu, n)]
    groups = [np.abs(g) + 1e-3 for g in groups]
    return Dataset.from_groups(groups)


def random_theta(rng, data):
    return ParamVector(rng.uniform(0.05, 0.8), data.mean * rng.uniform(0.7, 1.3, size=data.k))
