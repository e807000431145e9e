import pytest

from cofill import build_ball, builtin_group


@pytest.fixture(scope="session")
def z2():
    return builtin_group("z2")


@pytest.fixture(scope="session")
def z2_ball4(z2):
    pres, oracle = z2
    return build_ball(pres, oracle, 4)


@pytest.fixture(scope="session")
def z2_ball5(z2):
    pres, oracle = z2
    return build_ball(pres, oracle, 5)


@pytest.fixture(scope="session")
def free2():
    return builtin_group("free2")


@pytest.fixture(scope="session")
def surface2():
    return builtin_group("surface2")


@pytest.fixture(scope="session")
def surface2_ball4(surface2):
    pres, oracle = surface2
    return build_ball(pres, oracle, 4)
