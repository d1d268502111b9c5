import numpy as np
import pytest

import poisonlab as pl

W_STAR = np.array([0.0, np.log(2.0)])


@pytest.fixture(scope="session")
def toy():
    return pl.toy_three_points()


@pytest.fixture(scope="session")
def or_data():
    return pl.gen_or(seed=0)


@pytest.fixture(scope="session")
def or_test():
    return pl.gen_or(seed=1000)


@pytest.fixture(scope="session")
def logistic2():
    return pl.ModelSpec("logistic_binary", 2)


@pytest.fixture(scope="session")
def logistic3():
    return pl.ModelSpec("logistic_binary", 3)
