import pytest

from slimnoc.topo import slim_noc


@pytest.fixture(scope="session")
def sn5():
    return slim_noc(5, 4)


@pytest.fixture(scope="session")
def sn9():
    return slim_noc(9, 8)
