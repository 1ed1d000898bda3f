import pytest

from icb.network import paper_fixture


@pytest.fixture
def fixture_net():
    return paper_fixture()


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
