import pytest

from bellcal import calibrate
from bellcal.cli import bundled_runs_path, read_run_file


@pytest.fixture(scope="session")
def reference_runs():
    """The seven bundled measurement runs."""
    return read_run_file(bundled_runs_path())


@pytest.fixture(scope="session")
def reference_report(reference_runs):
    """Full calibration of the bundled dataset, shared across tests."""
    return calibrate(reference_runs)


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance check
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    print(f"\nACCEPTANCE {name}: {'PASS' if report.passed else 'FAIL'}")
