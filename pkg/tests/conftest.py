"""Shared fixtures: catalog damping models and prebuilt auxiliary tables."""

import pytest

from blowuplab.auxcalc import build_aux_table
from blowuplab.coeffs import DampingModel, ProblemSpec


def unit_problem(p: float, n: int = 1, alpha: float = 0.0, gamma: float = 0.0,
                 delta: float = 0.0) -> ProblemSpec:
    return ProblemSpec(n=n, alpha=alpha, gamma=gamma, delta=delta, p=p,
                       damping=DampingModel.constant(1.0))


@pytest.fixture(scope="session")
def aux_const1():
    """Table for b = 1 over a short horizon (identity accumulations)."""
    return build_aux_table(DampingModel.constant(1.0), 300.0)


@pytest.fixture(scope="session")
def aux_const1_scan():
    """Table for b = 1 wide enough for the scale ladder up to R = 256, d = 2."""
    return build_aux_table(DampingModel.constant(1.0), 140000.0)


@pytest.fixture(scope="session")
def aux_powerlaw_half():
    """Table for b = 1/sqrt(1+t)."""
    return build_aux_table(DampingModel.power_law(1.0, 0.5), 300.0)
