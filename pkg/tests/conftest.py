import pytest

_ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance_log(request):
    """Collects criterion lines so they appear in the terminal summary."""
    return request.config.stash[_ACCEPTANCE_LINES]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
