import pytest
from hypothesis import settings

from unitary_eis.cmfield import CMField

settings.register_profile("repo", deadline=None)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def gauss():
    return CMField(-1, 5)


@pytest.fixture(scope="session")
def eisenstein_field():
    return CMField(-3, 7)
