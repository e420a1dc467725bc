import random

import pytest

from musolve import zoo


@pytest.fixture(scope="session")
def shidoku():
    return zoo.build("shidoku")


@pytest.fixture(scope="session")
def futoshiki():
    return zoo.build("futoshiki")


@pytest.fixture(scope="session")
def binairo():
    return zoo.build("binairo")


@pytest.fixture(scope="session")
def sudoku_newspaper():
    return zoo.build("sudoku", "newspaper")


@pytest.fixture
def rng():
    return random.Random(20260826)
