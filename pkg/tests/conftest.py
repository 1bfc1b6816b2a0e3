import pytest

from twistdensity.curve import ApCache, validate_curve
from twistdensity.ntkit import shared_sieve
from twistdensity.testfn import build_testfn, build_weight


@pytest.fixture(scope="session")
def sieve():
    return shared_sieve(400_000)


@pytest.fixture(scope="session")
def curve11():
    """Conductor 11, split multiplicative; short model needs a2/a3 supplied."""
    return validate_curve(-13392, -1080432, 11, 1, {11: "split"},
                          {2: -2, 3: -1})


@pytest.fixture(scope="session")
def curve32():
    """Conductor 32, additive at 2, even functional equation."""
    return validate_curve(-1, 0, 32, 1, {2: "additive"})


@pytest.fixture(scope="session")
def curve37():
    """Conductor 37, nonsplit at 37, odd functional equation (rank one)."""
    return validate_curve(-16, 16, 37, -1, {37: "nonsplit"}, {2: -2})


@pytest.fixture(scope="session")
def cache11(curve11):
    return ApCache(curve11)


@pytest.fixture(scope="session")
def cache32(curve32):
    return ApCache(curve32)


@pytest.fixture(scope="session")
def cache37(curve37):
    return ApCache(curve37)


@pytest.fixture(scope="session")
def weight11():
    return build_weight("gaussian", 11)


@pytest.fixture(scope="session")
def fejer03():
    return build_testfn("fejer", 0.3)


@pytest.fixture(scope="session")
def fejer04():
    return build_testfn("fejer", 0.4)


@pytest.fixture(scope="session")
def bump04():
    return build_testfn("smooth_bump", 0.4)
