import numpy as np
import pytest

from coreapprox.games import (MuseumMatrix, SavingsParams, make_additive_game,
                              make_museum_game, make_savings_game, make_unanimity_game)

ACCEPTANCE_LINES = []


@pytest.fixture
def g3():
    """v = 0 except v(N) = 1; the core is the unit simplex."""
    return make_unanimity_game(3)


@pytest.fixture
def museum_micro():
    return make_museum_game(MuseumMatrix([[1, 0], [1, 1]]))


@pytest.fixture
def additive123():
    return make_additive_game([1, 2, 3])


@pytest.fixture(scope="session")
def savings6():
    return make_savings_game(SavingsParams.benchmark(6))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
