import pytest

from lpw.grid import GridSpec
from lpw.lp import build_partition


@pytest.fixture(scope="session")
def grid2():
    return GridSpec(2, 64)


@pytest.fixture(scope="session")
def part2(grid2):
    return build_partition(grid2)


@pytest.fixture(scope="session")
def grid1():
    return GridSpec(1, 256)


@pytest.fixture(scope="session")
def part1(grid1):
    return build_partition(grid1)
