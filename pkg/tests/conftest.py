import math

import numpy as np
import pytest
from scipy.integrate import quad

from unitclust.poly import make_polynomial


def unity_minus_one(n):
    c = np.zeros(n + 1)
    c[0], c[-1] = -1.0, 1.0
    return make_polynomial(c)


@pytest.fixture
def rng():
    return np.random.default_rng(20070603)


def pair_distance(a, b):
    """Greedy matching distance between two root multisets of equal size."""
    b = list(b)
    worst = 0.0
    for z in a:
        j = int(np.argmin(np.abs(np.array(b) - z)))
        worst = max(worst, abs(b.pop(j) - z))
    return worst


def cauchy_moment_by_quadrature(scale, s):
    """E|X|^s for a Cauchy law, integrating the density on [0, scale] and, after x = scale/t, the tail."""
    head = quad(lambda x: x**s * scale / (math.pi * (x * x + scale * scale)), 0, scale,
                epsabs=0, epsrel=1e-12, limit=200)[0]
    tail = quad(lambda t: (scale / t) ** s / (math.pi * (1 + t * t)), 0, 1,
                epsabs=0, epsrel=1e-12, limit=200)[0]
    return 2 * (head + tail)


# Verdict lines collected by the acceptance suite, replayed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
