"""Shared fixtures: the three acceptance sweeps are expensive, compute once."""

import pytest

from desim.stats import sweep

SWEEP_T = 50000.0
SWEEP_NS = range(2, 21)
SWEEP_SEEDS = range(10)
SWEEP_WORKERS = 2


def _by_n(results):
    cells = {}
    for r in results:
        cells.setdefault(r.n, []).append(r.mean_waiting)
    return cells


@pytest.fixture(scope="session")
def ordered_sweep():
    return sweep("ordered", SWEEP_NS, SWEEP_T, SWEEP_SEEDS, workers=SWEEP_WORKERS)


@pytest.fixture(scope="session")
def bowl_sweep():
    return sweep("bowl", SWEEP_NS, SWEEP_T, SWEEP_SEEDS, workers=SWEEP_WORKERS)


@pytest.fixture(scope="session")
def impatient_sweep():
    return sweep("impatient", SWEEP_NS, SWEEP_T, SWEEP_SEEDS, workers=SWEEP_WORKERS)


@pytest.fixture(scope="session")
def ordered_cells(ordered_sweep):
    return _by_n(ordered_sweep)


@pytest.fixture(scope="session")
def bowl_cells(bowl_sweep):
    return _by_n(bowl_sweep)


@pytest.fixture(scope="session")
def impatient_cells(impatient_sweep):
    return _by_n(impatient_sweep)
