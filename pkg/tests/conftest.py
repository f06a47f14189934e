import pytest

from mzvohno.series_eval import EvalConfig


@pytest.fixture(scope="session")
def cfg():
    # the asymptotic tail keeps N = 2e5 at full double precision
    return EvalConfig(truncation_N=200_000)


@pytest.fixture(scope="session")
def cfg_full():
    return EvalConfig()
