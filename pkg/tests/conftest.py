import pytest

from qlimit._backend import available_backends, get_kernels

ACCEPTANCE_LINES = []


@pytest.fixture(params=available_backends())
def kernels(request):
    return get_kernels(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
