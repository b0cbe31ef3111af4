import pytest

from fgsim.model import CODATA, derive, reference_params, scale_params


@pytest.fixture(scope="session")
def ref():
    return reference_params()


@pytest.fixture(scope="session")
def ref_d(ref):
    return derive(ref)


@pytest.fixture(scope="session")
def micro():
    return scale_params(reference_params(), 1e-6)


@pytest.fixture(scope="session")
def micro_d(micro):
    return derive(micro)


@pytest.fixture(scope="session")
def consts():
    return CODATA


ACCEPTANCE = []


def record(criterion, name, ok, detail):
    """Log one acceptance line; the summary is printed at the end of the run."""
    line = f"criterion {criterion:>3} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
