import pytest

from tkindex.lattice import CharacterGroup, GModule


@pytest.fixture
def S1():
    return CharacterGroup(1)


@pytest.fixture
def T2():
    return CharacterGroup(2)


@pytest.fixture
def circle(S1):
    return GModule(S1, (S1.weight((1,)),))


@pytest.fixture
def hexagonal(T2):
    return GModule(T2, (T2.weight((1, 0)), T2.weight((0, 1)), T2.weight((1, 1))))
