import pytest

from tinyrts.config import load_spec


@pytest.fixture(scope="session")
def minirts_spec():
    return load_spec("minirts")


@pytest.fixture(scope="session")
def ctf_spec():
    return load_spec("ctf")


@pytest.fixture(scope="session")
def td_spec():
    return load_spec("td")
