import numpy as np
import pytest

from fdrelay import (
    LinkParams,
    SelfInterference,
    SymmetricConfig,
    SymmetricProbTable,
    TwoUserConfig,
    symmetric_links,
    symmetric_success_probs,
)
from fdrelay.queue_analysis import HessenbergChain
from fdrelay.two_user import required_keys

# numerical-results geometry: meters, watts
R_D, R_0, R_0D = 130.0, 60.0, 80.0
ALPHA, ETA = 4.0, 1e-11
P_RELAY, P_USER = 10e-3, 1e-3


def reference_links(gamma):
    ur = LinkParams(R_0, P_USER, 1.0, ETA, gamma, ALPHA)
    ud = LinkParams(R_D, P_USER, 1.0, ETA, gamma, ALPHA)
    rd = LinkParams(R_0D, P_RELAY, 1.0, ETA, gamma, ALPHA)
    return ur, ud, rd


def symmetric_config(n, gamma, g, q=0.3, q0=0.9):
    ur, ud, rd = reference_links(gamma)
    return SymmetricConfig(n, q, q0, symmetric_success_probs(n, ur, ud, rd, SelfInterference(g)))


def two_user_config(gamma, g, q=0.3, q0=0.9):
    links = symmetric_links(2, *reference_links(gamma))
    return TwoUserConfig.from_links(q0, q, q, links, SelfInterference(g))


def random_two_user(rng):
    q0, q1, q2 = rng.random(3)
    table = {key: float(rng.random()) for key in required_keys()}
    return TwoUserConfig(float(q0), float(q1), float(q2), table)


def random_symmetric(rng, n=None):
    n = int(rng.integers(1, 7)) if n is None else n
    probs = SymmetricProbTable.from_arrays(rng.random((n, 2)), rng.random((n, 2)), rng.random(n + 1))
    return SymmetricConfig(n, float(rng.random()), float(rng.random()), probs)


def random_stable_chain(rng, max_drift=-0.05):
    while True:
        a = rng.dirichlet(np.ones(int(rng.integers(1, 6))))
        b = rng.dirichlet(np.ones(int(rng.integers(2, 7))) * 0.7)
        chain = HessenbergChain(a, b)
        if chain.drift() < max_drift:
            return chain


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
