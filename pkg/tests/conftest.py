import pytest

from curvlab.catalog import builtin

ACCEPTANCE_LINES: list = []


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE_LINES.append((criterion, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def godel():
    return builtin("godel").metric


@pytest.fixture(scope="session")
def ex21i():
    return builtin("ex21i").metric


@pytest.fixture(scope="session")
def ex21ii():
    return builtin("ex21ii").metric


@pytest.fixture(scope="session")
def som():
    return builtin("som_raychaudhuri").metric


@pytest.fixture(scope="session")
def minkowski():
    return builtin("minkowski").metric


@pytest.fixture(scope="session")
def const_curv():
    return builtin("const_curv").metric
