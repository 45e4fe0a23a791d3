import pytest

from triseal.pairing import CurveContext, OracleContext


@pytest.fixture
def oracle101():
    """Worked-vector context: q = 101, hash values injected per test."""
    return OracleContext(101)


@pytest.fixture
def oracle_big():
    """Property-suite context: large prime order."""
    return OracleContext()


@pytest.fixture(scope="session")
def curve_ctx():
    return CurveContext()
