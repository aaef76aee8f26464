import pytest

from warpgeo.oracle import self_test


@pytest.fixture(scope="session")
def oracle_gate():
    """Every oracle-backed test first needs the oracle to pass on closed-form charts."""
    report = self_test()
    if not report.passed:
        pytest.fail(f"oracle self-test failed: {report.to_text().strip()}")
    return report


@pytest.fixture
def say(capsys):
    """Print straight to the terminal, bypassing capture."""
    def _say(text):
        with capsys.disabled():
            print(text)
    return _say
