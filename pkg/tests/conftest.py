import pytest

from cyclotactor.landscape import SyntheticLandscapeParams, generate_synthetic


@pytest.fixture(scope="session")
def params():
    return SyntheticLandscapeParams()


@pytest.fixture(scope="session")
def grid(params):
    return generate_synthetic(params)
