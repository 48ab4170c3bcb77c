import pytest

from regchrom.pairing import Multigraph


@pytest.fixture
def k4():
    return Multigraph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])


@pytest.fixture
def c5():
    return Multigraph(5, [(i, (i + 1) % 5) for i in range(5)])


@pytest.fixture
def c6():
    return Multigraph(6, [(i, (i + 1) % 6) for i in range(6)])


@pytest.fixture
def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    return Multigraph(10, outer + inner + spokes)


@pytest.fixture
def loop_graph():
    return Multigraph(1, [(0, 0)])
