"""Shared fixtures for the entropy benchmarks."""

from __future__ import annotations

import pytest

from composite_entropy.core.config import SweepConfig
from composite_entropy.physics.kernels import GridSpec, KernelFunction
from composite_entropy.physics.model import CompositeParams, Gaussian


@pytest.fixture(scope="session")
def reference_kernel() -> KernelFunction:
    """The exact kernel at the reference point u = 1, B = 2."""
    return KernelFunction(CompositeParams(u=1.0), Gaussian(2.0))


@pytest.fixture(scope="session")
def sweep_config() -> SweepConfig:
    """A 2 x 5 Gaussian sweep at the default grid sizes."""
    return SweepConfig(u_values=(1.0, 8.0), v_values=(0.0, 1.0, 2.0, 4.0, 8.0))


@pytest.fixture(scope="session")
def default_grid() -> GridSpec:
    return GridSpec(1024)
