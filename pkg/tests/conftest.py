from __future__ import annotations

import pytest

from raussim import GenModel, build_perfect_lattice, generate_faulty, renormalize
from raussim.analysis import timing_scaling


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the numba kernels once so timed tests stay clean."""
    inst = build_perfect_lattice((12, 12, 12), box_size=6)
    renormalize(inst, 6)
    return True


@pytest.fixture(scope="session")
def small_faulty():
    """One shared small faulty instance (B=8 addressing, 3x3x3 boxes)."""
    return generate_faulty((24, 24, 24), GenModel(p_fail=0.25, seed=11), box_size=8)


@pytest.fixture(scope="session")
def timing_report(warm_kernels):
    """Shared wall-time measurements: structures+paths phase over box sizes."""
    return timing_scaling((12, 16, 20, 24), seeds=(0, 1, 2))
