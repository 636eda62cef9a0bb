import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from moran.graph import GENERATORS, gen_random_connected  # noqa: E402


def family_graphs(sizes):
    """Every named generator at every size it accepts."""
    out = []
    for kind, gen in sorted(GENERATORS.items()):
        for n in sizes:
            try:
                out.append((f"{kind}-{n}", gen(n)))
            except ValueError:
                pass
    return out


def random_corpus(count=50, sizes=range(2, 9), seed=20240601):
    """``count`` random connected graphs with n cycling through ``sizes``."""
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    graphs = []
    for i in range(count):
        n = sizes[i % len(sizes)]
        p = rng.uniform(0.05, 0.6)
        graphs.append((f"random-{i}-n{n}", gen_random_connected(n, p, rng)))
    return graphs


@pytest.fixture(scope="session")
def corpus():
    return random_corpus()


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion; printed in the terminal summary."""
    state = {}

    def record(criterion, passed, detail):
        state["line"] = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        return passed

    yield record
    if "line" in state:
        ACCEPTANCE_LINES.append(state["line"])
        print(state["line"])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
