import pytest

from gaudinkp import joint_diagonalize, random_model


@pytest.fixture(scope="session")
def tiny():
    model = random_model(2, 2, seed=7)
    return model, joint_diagonalize(model, seed=7)


@pytest.fixture(scope="session")
def small():
    model = random_model(2, 3, seed=7)
    return model, joint_diagonalize(model, seed=7)


@pytest.fixture(scope="session")
def medium():
    model = random_model(3, 3, seed=7)
    return model, joint_diagonalize(model, seed=7)
