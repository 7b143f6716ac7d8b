import pytest
from hypothesis import settings

from hyerslab.algebra import AlgebraContext

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def m2():
    return AlgebraContext.matrix(2)


@pytest.fixture
def m3():
    return AlgebraContext.matrix(3)


@pytest.fixture
def poly():
    return AlgebraContext.poly()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
