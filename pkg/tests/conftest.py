import numpy as np
import pytest

from movingsource.core import MeshState, SolutionState


def make_state(nodes, values, source_indices=(), time=0.0, ghosts=None):
    mesh = MeshState(time, np.asarray(nodes, dtype=float), np.asarray(source_indices, dtype=int))
    return SolutionState(mesh, np.asarray(values, dtype=float), ghosts)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
