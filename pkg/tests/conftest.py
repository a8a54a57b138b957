import itertools

import numpy as np
import pytest
from hypothesis import settings

from tetradlogit.network import MISSING, OrderedNetwork

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_network(seed, N=7, M=2, k=2, p_missing=0.1, discrete=False):
    rng = np.random.default_rng(seed)
    Y = rng.integers(0, M + 1, size=(N, N))
    Y[rng.random((N, N)) < p_missing] = MISSING
    if discrete:
        X = rng.integers(-2, 3, size=(N, N, k)).astype(float)
    else:
        X = rng.normal(size=(N, N, k))
    return OrderedNetwork(Y, X, M)


def brute_force_informative(net, vectors):
    """Every ordered-pair-canonical quadruple by plain loops: {(i1,i2,j1,j2,vector): (y, r)}."""
    N = net.n_nodes
    Y, X, obs = net.outcomes, net.covariates, net.observed
    out = {}
    for i1, i2 in itertools.combinations(range(N), 2):
        for j1, j2 in itertools.combinations(range(N), 2):
            if len({i1, i2, j1, j2}) < 4:
                continue
            if not (obs[i1, j1] and obs[i1, j2] and obs[i2, j1] and obs[i2, j2]):
                continue
            for v in vectors:
                m11, m12, m21, m22 = v
                z = 0.5 * ((int(Y[i1, j1] >= m11) - int(Y[i1, j2] >= m12))
                           - (int(Y[i2, j1] >= m21) - int(Y[i2, j2] >= m22)))
                if abs(z) == 1:
                    r = (X[i1, j1] - X[i1, j2]) - (X[i2, j1] - X[i2, j2])
                    out[(i1, i2, j1, j2, tuple(v))] = (int(z == 1), r)
    return out


def upsilon_by_definition(scores, tetrads, N):
    """Sum over dyads (i, j), i != j, of v_ij v_ij' with v_ij the sum of scores of observations owning (i, j)."""
    p = scores.shape[1]
    U = np.zeros((p, p))
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            v = np.zeros(p)
            for s, (i1, i2, j1, j2) in zip(scores, tetrads):
                if (i, j) in ((i1, j1), (i1, j2), (i2, j1), (i2, j2)):
                    v += s
            U += np.outer(v, v)
    return U


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, passed, detail)."""
    def record(number, title, passed, detail=""):
        CRITERIA.append((number, title, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
