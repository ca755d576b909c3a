import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uulearn.estimators import GaussianMixtureSpec, UnlabeledSet
from uulearn.rewrite import PriorTriple

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def mixture():
    return GaussianMixtureSpec.standard(pi=0.3)


@pytest.fixture
def mixture_priors():
    return PriorTriple(0.3, 0.9, 0.4)


@pytest.fixture
def u_pair(rng):
    X1 = rng.normal(size=(40, 2)) + 0.5
    X2 = rng.normal(size=(30, 2)) - 0.5
    return UnlabeledSet(X1, 0.9), UnlabeledSet(X2, 0.4)


_ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict."""

    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[number])
