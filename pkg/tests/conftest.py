from __future__ import annotations

import pytest

from qpenta.cocycles import heisenberg_cocycle, make_cocycle
from qpenta.groups import FiniteAffine, FiniteProductAffine, RealAffine, RealProductAffine
from qpenta.operators import FiniteEngine


@pytest.fixture(scope="session")
def f5():
    return FiniteAffine(5)


@pytest.fixture(scope="session")
def f5x():
    return FiniteAffine(5, phase_mode="exact")


@pytest.fixture(scope="session")
def fp3():
    return FiniteProductAffine(3)


@pytest.fixture(scope="session")
def fp5x():
    return FiniteProductAffine(5, phase_mode="exact")


@pytest.fixture(scope="session")
def ra():
    return RealAffine()


@pytest.fixture(scope="session")
def rpa():
    return RealProductAffine()


@pytest.fixture(scope="session")
def du5x(f5x):
    return make_cocycle("coboundary:u=dlogsq", f5x)


@pytest.fixture(scope="session")
def engine5(f5):
    return FiniteEngine(f5, make_cocycle("coboundary:u=dlogsq", f5))


@pytest.fixture(scope="session")
def engine5_trivial(f5):
    return FiniteEngine(f5)


@pytest.fixture(scope="session")
def engine_h3(fp3):
    return FiniteEngine(fp3, heisenberg_cocycle(fp3))


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(n, ok, detail)."""

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
