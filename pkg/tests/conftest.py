import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def legendre_symbolic():
    from dworkcrystal.fixtures import legendre

    return legendre()


@pytest.fixture(scope="session")
def example_family():
    from dworkcrystal.fixtures import example_family

    return example_family()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
