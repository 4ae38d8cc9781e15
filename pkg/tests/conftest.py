"""Shared pytest plumbing.

The acceptance checks in test_acceptance.py record one verdict line
each; this hook prints the collected scoreboard after the test summary
so the lines survive output capture.
"""

import pytest

ACCEPTANCE_LOG = pytest.StashKey()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Ordered verdict lines, one per acceptance check."""
    return request.config.stash.setdefault(ACCEPTANCE_LOG, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LOG, None)
    if lines:
        terminalreporter.section("acceptance checklist")
        for line in lines:
            terminalreporter.write_line(line)
