"""Shared fixtures and independent 1D oracles for the test suite."""

import numpy as np
import pytest

import softphoton as sp

LAM = 0.1
UV = 1.0


@pytest.fixture(scope="session")
def dispersion():
    return sp.Dispersion(LAM)


@pytest.fixture(scope="session")
def ff():
    return sp.FormFactor(UV)


@pytest.fixture(scope="session")
def light_grid(dispersion, ff):
    """Fast grid for algebra-level tests (still ~1e-8 accurate)."""
    return sp.default_grid(dispersion, ff, n_panels=12, n_radial=8,
                           n_costheta=24, n_phi=8)


@pytest.fixture(scope="session")
def std_grid(dispersion, ff):
    """The production default grid at lam = 0.1."""
    return sp.default_grid(dispersion, ff)


@pytest.fixture(scope="session")
def kin_v():
    return sp.Kinematics(v=(0.0, 0.0, 0.2))


@pytest.fixture(scope="session")
def kin_vp():
    return sp.Kinematics(v=(0.2, 0.0, 0.0))


def radial_gauss(f, lo, hi, n_panels=80, n_nodes=30):
    """Machine-accurate 1D integral of f(k) on [lo, hi], geometric panels.

    Independent of the production 3D engine: plain Gauss-Legendre panels and
    a numpy dot product.
    """
    edges = np.geomspace(lo, hi, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        half = 0.5 * (b - a)
        nodes = a + half * (x + 1.0)
        total += half * float(np.dot(w, f(nodes)))
    return total
