import numpy as np
import pytest

from cellts import ArmaModel, periodic_contaminate, simulate

AR3 = ArmaModel((0.5, 0.2, 0.2), (), 1.0)

ACCEPTANCE_LINES: list[str] = []


def reference_experiment(seed, T=1000):
    """AR(3) path with every 7th cell (1, 8, 15, ...) replaced by 4."""
    return periodic_contaminate(simulate(AR3, T, seed), 7, 4.0, 1)


def ar_autocovariances(phi, sigma, nlags):
    """gamma(0..nlags) of an AR(p) by solving the linear autocovariance equations."""
    p = len(phi)
    A = np.zeros((p + 1, p + 1))
    rhs = np.zeros(p + 1)
    rhs[0] = sigma**2
    for k in range(p + 1):
        A[k, k] += 1.0
        for i, ph in enumerate(phi, start=1):
            A[k, abs(k - i)] -= ph
    g = list(np.linalg.solve(A, rhs))
    for k in range(p + 1, nlags + 1):
        g.append(sum(ph * g[k - i] for i, ph in enumerate(phi, start=1)))
    return np.array(g[: nlags + 1])


@pytest.fixture
def ar3():
    return AR3


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
