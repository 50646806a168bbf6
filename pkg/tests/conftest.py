import numpy as np
import pytest

from hybrid_nls.boxes import make_partition


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def partition():
    return make_partition()


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def accept(request):
    """Record one acceptance criterion as a PASS/FAIL line, then assert it."""

    def record(ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {request.node.name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
