import numpy as np
import pytest

from mpacsync.graph import generate_random_topology


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graphs(n_graphs, seed=0, n_range=(3, 10), trees_every=2):
    """Mix of spanning trees and loopy graphs for oracle comparisons."""
    r = np.random.default_rng(seed)
    out = []
    for i in range(n_graphs):
        n = int(r.integers(n_range[0], n_range[1] + 1))
        if i % trees_every == 0:
            c = 2.0 / n
        else:
            c = float(r.uniform(2.0 / n + 1e-9, 1.0))
        out.append(generate_random_topology(n, c, r))
    return out


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Record one pass/fail line for the acceptance summary."""
    lines = request.config.stash[_ACCEPTANCE]

    def _report(number, name, ok, detail):
        line = f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
        lines.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
