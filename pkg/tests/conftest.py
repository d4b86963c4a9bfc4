import pytest

from aircov.coverage import Deployment


@pytest.fixture
def dep():
    return Deployment()


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks")
