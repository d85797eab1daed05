import pytest
from hypothesis import settings

# compiled kernels make first calls slow; timing is not what these tests check
settings.register_profile("default", deadline=None)
settings.load_profile("default")


class StubGenerator:
    """Replays a fixed list of integers and counts how many were drawn."""

    def __init__(self, values, M):
        self.values = list(values)
        self.M = M
        self.steps_taken = 0

    def step(self):
        v = self.values[self.steps_taken % len(self.values)]
        self.steps_taken += 1
        return v


@pytest.fixture
def stub():
    return StubGenerator


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
