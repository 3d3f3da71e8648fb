"""Quadrature engine: dispersion, form factor, deterministic integration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softphoton.errors import GridTooCoarse, NonFiniteIntegrand, NonPositiveCutoff
from softphoton.momentum import (Dispersion, FormFactor, QuadratureGrid,
                                 default_grid, form_factor, integrate, omega)

from conftest import LAM, UV, radial_gauss

# frozen from the 1e6-point midpoint Riemann oracle of
# 4 pi int k^2 rho^2(k) / (k^2 + lam^2)^{3/2} dk at lam=0.1, uv=1
I3_ORACLE = 21.902970641386833


def test_omega_at_rest():
    assert omega((0.0, 0.0, 0.0), Dispersion(0.5)) == 0.5


def test_omega_pythagorean():
    assert omega((0.0, 3.0, 0.0), Dispersion(4.0)) == pytest.approx(5.0, rel=1e-15)


def test_omega_small_mass_expansion():
    val = omega((1.0, 0.0, 0.0), Dispersion(1e-3))
    assert val == pytest.approx(math.sqrt(1.0 + 1e-6), rel=1e-15)
    assert val == pytest.approx(1.0000005, rel=1e-9)


@given(lam=st.floats(1e-6, 10.0), kx=st.floats(-50, 50), ky=st.floats(-50, 50),
       kz=st.floats(-50, 50))
def test_omega_bounds(lam, kx, ky, kz):
    d = Dispersion(lam)
    w = float(omega((kx, ky, kz), d))
    assert w >= lam
    assert w >= math.sqrt(kx * kx + ky * ky + kz * kz)


@given(lam=st.floats(1e-6, 10.0), k1=st.floats(0, 40), k2=st.floats(0, 40))
def test_omega_monotone(lam, k1, k2):
    d = Dispersion(lam)
    lo, hi = sorted((k1, k2))
    assert omega((0, 0, lo), d) <= omega((0, 0, hi), d)


def test_dispersion_rejects_zero_mass():
    with pytest.raises(NonPositiveCutoff):
        Dispersion(0.0)


def test_form_factor_normalization():
    f = FormFactor(2.0)
    assert form_factor((0.0, 0.0, 0.0), f) == 1.0


def test_form_factor_at_scale():
    f = FormFactor(0.7)
    assert form_factor((0.7, 0.0, 0.0), f) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert form_factor((0.0, 2.1, 0.0), f) == pytest.approx(math.exp(-4.5), rel=1e-14)


def test_gaussian_integral(std_grid):
    val = integrate(lambda k: np.exp(-np.sum(k * k, axis=1)), std_grid)
    assert val.imag == 0.0
    assert val.real == pytest.approx(math.pi**1.5, rel=1e-10)


def test_ball_volume():
    # panel edge placed exactly at the ball radius
    grid = QuadratureGrid(((1e-4, 0.5, 12), (0.5, 1.0, 12), (1.0, 2.0, 12)),
                          n_costheta=16, n_phi=8)
    val = integrate(lambda k: (np.sum(k * k, axis=1) <= 1.0).astype(float), grid)
    assert val.real == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_angular_weights_give_full_sphere():
    grid = QuadratureGrid(((1.0, 2.0, 16),), n_costheta=24, n_phi=12)
    shell = integrate(lambda k: np.ones(len(k)), grid)
    assert shell.real == pytest.approx(4.0 * math.pi * (2.0**3 - 1.0) / 3.0, rel=1e-13)


def test_ir_integral_against_riemann_oracle(std_grid, dispersion, ff):
    def integrand(k):
        return form_factor(k, ff) ** 2 / omega(k, dispersion) ** 3

    val = integrate(integrand, std_grid).real
    assert val == pytest.approx(I3_ORACLE, rel=1e-9)


def test_rotational_symmetry_matches_radial_oracle(std_grid, dispersion, ff):
    def integrand(k):
        kk = np.sum(k * k, axis=1)
        return np.exp(-kk / 3.0) / (kk + dispersion.lam**2)

    full3d = integrate(integrand, std_grid).real
    oracle = 4.0 * math.pi * radial_gauss(
        lambda q: q**2 * np.exp(-q**2 / 3.0) / (q**2 + dispersion.lam**2),
        dispersion.lam * 1e-3, 10.0 * ff.uv_scale)
    assert full3d == pytest.approx(oracle, rel=1e-9)


def test_ir_integral_monotone_in_cutoff(ff):
    vals = []
    for lam in (0.05, 0.1, 0.2, 0.4):
        d = Dispersion(lam)
        grid = default_grid(d, ff, n_panels=12, n_radial=8, n_costheta=8, n_phi=4,
                            check_rtol=None)
        vals.append(integrate(
            lambda k: form_factor(k, ff) ** 2 / omega(k, d) ** 3, grid).real)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_ir_log_divergence_rate(ff):
    # rho(0) = 1 makes successive decade differences approach 4 pi ln 10
    vals = {}
    for lam in (1e-2, 1e-3, 1e-4):
        d = Dispersion(lam)
        grid = default_grid(d, ff, n_panels=16, n_radial=10, n_costheta=8, n_phi=4,
                            check_rtol=None)
        vals[lam] = integrate(
            lambda k: form_factor(k, ff) ** 2 / omega(k, d) ** 3, grid).real
    expected = 4.0 * math.pi * math.log(10.0)
    for hi, lo in ((1e-2, 1e-3), (1e-3, 1e-4)):
        assert vals[lo] - vals[hi] == pytest.approx(expected, rel=0.05)


def test_weights_positive_edges_increasing(std_grid):
    assert np.all(std_grid.weights > 0.0)
    edges = [p[0] for p in std_grid.radial_panels]
    assert all(a < b for a, b in zip(edges, edges[1:]))
    assert std_grid.radial_panels[0][0] > 0.0


def test_grid_too_coarse_signalled():
    grid = QuadratureGrid(((0.1, 10.0, 4),), n_costheta=4, n_phi=4, check_rtol=1e-10)

    def wiggly(k):
        kk = np.linalg.norm(k, axis=1)
        return np.cos(5.0 * kk) * np.exp(-kk)

    with pytest.raises(GridTooCoarse):
        integrate(wiggly, grid)


def test_non_finite_integrand(light_grid):
    with pytest.raises(NonFiniteIntegrand):
        integrate(lambda k: np.full(len(k), np.nan), light_grid)


def test_thread_count_invariance(monkeypatch, dispersion, ff):
    grid = default_grid(dispersion, ff, n_panels=8, n_radial=8, n_costheta=8, n_phi=4,
                        check_rtol=None)

    def integrand(k):
        return np.exp(-np.sum(k * k, axis=1)) * (1.0 + 0.3j)

    monkeypatch.setenv("SOFTPHOTON_THREADS", "1")
    one = integrate(integrand, grid)
    monkeypatch.setenv("SOFTPHOTON_THREADS", "3")
    three = integrate(integrand, grid)
    assert one == three  # bitwise


def test_bad_panels_rejected():
    with pytest.raises(ValueError):
        QuadratureGrid(((0.0, 1.0, 8),), 8, 4)
    with pytest.raises(ValueError):
        QuadratureGrid(((1.0, 2.0, 8), (1.5, 3.0, 8)), 8, 4)


@settings(max_examples=20)
@given(lam=st.floats(0.05, 1.0), scale=st.floats(0.5, 2.0))
def test_gaussian_integral_property(lam, scale):
    d = Dispersion(lam)
    f = FormFactor(scale)
    grid = default_grid(d, f, n_panels=10, n_radial=8, n_costheta=8, n_phi=4,
                        check_rtol=None)
    val = integrate(lambda k: np.exp(-np.sum(k * k, axis=1) / scale**2), grid).real
    assert val == pytest.approx((math.pi * scale**2) ** 1.5, rel=1e-8)
