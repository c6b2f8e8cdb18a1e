import random
from fractions import Fraction

import numpy as np
import pytest

from bdspace import Params, build_ledger, default_params


@pytest.fixture(scope="session")
def float_ledger():
    return build_ledger(default_params(), 6)


@pytest.fixture(scope="session")
def float_ledger5():
    return build_ledger(default_params(), 5)


@pytest.fixture(scope="session")
def exact_params():
    return Params("97/100", "443648/1000000", "861/100", mode="exact")


@pytest.fixture(scope="session")
def exact_ledger(exact_params):
    return build_ledger(exact_params, 5)


def random_rationals(rng: random.Random, shape):
    """Object array of small random rationals."""
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    return out


_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__.endswith("test_acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _ACCEPTANCE.append((doc, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome, duration in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {doc} ({duration:.1f}s)")
