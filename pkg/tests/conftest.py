import pytest

from gridcell.config import NetworkConfig, default_profile_path
from gridcell.scenario import load_profiles


@pytest.fixture(scope="session")
def cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def profiles():
    return load_profiles(default_profile_path())


def pytest_terminal_summary(terminalreporter):
    import sys

    test_acceptance = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if test_acceptance is None:
        return
    lines = [test_acceptance.RESULTS[k] for k in sorted(test_acceptance.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
