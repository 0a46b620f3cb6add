from itertools import product

import numpy as np
import pytest

from rbriop.field_tower import default_tower
from rbriop.iop_framework import preset
from rbriop.poly_core import EvalTable, Grid, MultiPoly, UniPoly


@pytest.fixture(scope="session")
def tower():
    return default_tower()


@pytest.fixture(scope="session")
def F(tower):
    return tower.field(16)


@pytest.fixture(scope="session")
def params():
    return preset("desk27")


@pytest.fixture(scope="session")
def enc(tower):
    """The encoding axis: GF(256) inside GF(2^16)."""
    return tower.subfield_elements(8, 16)


@pytest.fixture(scope="session")
def enc_grid1(enc):
    return Grid([enc], ["gf8"])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_uni(F, deg, rng):
    return UniPoly(F, [int(v) for v in rng.integers(0, F.size, deg + 1)])


def random_tri(F, deg, rng, total=True):
    exps = [e for e in product(range(deg + 1), repeat=3) if not total or sum(e) <= deg]
    return MultiPoly(F, 3, {e: int(rng.integers(0, F.size)) for e in exps})


def uni_table(F, poly, grid):
    return EvalTable(F, grid, poly(grid.axes[0]))


def counts_of(res):
    return (res.counts["input"], res.counts["proof"], res.counts["plain"])


# acceptance criteria record one PASS/FAIL line each; the summary hook prints them
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
