"""Displacement algebra: group law, vacuum expectations, Fock-matrix oracle.

The brute-force oracle realizes up to three active modes as truncated
occupation-number matrices (scipy expm) with the metric encoded in a diagonal
Gram matrix, and validates compose / vacuum_expectation / isometry against
the closed coherent-state algebra.
"""

import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy.linalg import expm

from softphoton.coherence import CoherenceFunction, Kinematics
from softphoton.errors import IndexMismatch, MetricMismatch
from softphoton.weyl import (DisplacementOperator, PhotonList, adjoint, coherent_overlap,
                             compose, creation_factor, inverse, n_photon_element,
                             pairing, vacuum_expectation)

NMAX = 9


class ModeGrid:
    """Grid stand-in: n discrete modes with unit weights."""

    def __init__(self, n_nodes):
        self.n_nodes = n_nodes

    def integrate(self, g):
        vals = np.asarray(g(np.zeros((self.n_nodes, 3))))
        return complex(np.sum(vals))


@dataclass(frozen=True)
class ArrayCoherence:
    rows: tuple      # per-node component tuples
    metric: str

    @property
    def ncomp(self):
        return len(self.rows[0])

    def eval(self, k):
        return np.array(self.rows, dtype=complex)[: len(k)]


def _hilbert_pair():
    grid = ModeGrid(2)
    f = ArrayCoherence(((0.31 + 0.12j, -0.22), (0.15j, 0.0)), "hilbert")
    g = ArrayCoherence(((-0.11, 0.27 - 0.3j), (0.2 + 0.1j, 0.0)), "hilbert")
    return grid, f, g


def _indefinite_pair():
    grid = ModeGrid(1)
    f = ArrayCoherence(((0.4 + 0.1j, 0.21, 0.0, -0.3j),), "indefinite")
    g = ArrayCoherence(((0.17j, -0.25, 0.0, 0.12),), "indefinite")
    return grid, f, g


def _active_modes(coh):
    """(amplitudes, signs) of the nonzero (node, component) slots."""
    vals = np.array(coh.rows, dtype=complex)
    if coh.metric == "hilbert":
        lowered = vals
        signs = np.ones(vals.shape[1])
    else:
        lowered = vals * np.array([1.0, -1.0, -1.0, -1.0])
        signs = np.array([-1.0, 1.0, 1.0, 1.0])
    amps, sgn = [], []
    for i in range(vals.shape[0]):
        for c in range(vals.shape[1]):
            amps.append(lowered[i, c])
            sgn.append(signs[c])
    return np.array(amps), np.array(sgn)


def _mask_active(amps_list):
    keep = np.zeros(len(amps_list[0]), dtype=bool)
    for amps in amps_list:
        keep |= np.abs(amps) > 0
    return keep


def _mode_matrices(n_modes, signs):
    adag1 = np.diag(np.sqrt(np.arange(1, NMAX)), -1)
    a1 = np.diag(np.sqrt(np.arange(1, NMAX)), 1)
    eye = np.eye(NMAX)
    ops = []
    gram = np.ones(1)
    for j in range(n_modes):
        mats = [eye] * n_modes
        mats[j] = adag1
        adag = mats[0]
        for m in mats[1:]:
            adag = np.kron(adag, m)
        mats[j] = signs[j] * a1
        a = mats[0]
        for m in mats[1:]:
            a = np.kron(a, m)
        ops.append((a, adag))
        gram = np.kron(gram, signs[j] ** np.arange(NMAX))
    return ops, gram


def _displacement_matrix(scale, amps, ops):
    dim = ops[0][0].shape[0]
    x = np.zeros((dim, dim), dtype=complex)
    for (a, adag), amp in zip(ops, amps):
        x += amp * adag + np.conjugate(amp) * a
    return expm(1j * scale * x)


def _fock_setup(cohs, scales):
    amps_all, signs = zip(*(_active_modes(c) for c in cohs))
    signs = signs[0]
    keep = _mask_active(amps_all)
    assert np.count_nonzero(keep) <= 3, "oracle limited to three active modes"
    ops, gram = _mode_matrices(int(np.count_nonzero(keep)), signs[keep])
    mats = [_displacement_matrix(s, amps[keep], ops)
            for s, amps in zip(scales, amps_all)]
    return mats, ops, gram


@pytest.mark.parametrize("make", [_hilbert_pair, _indefinite_pair])
def test_vacuum_expectation_matches_fock_matrix(make):
    grid, f, g = make()
    for coh, scale in ((f, 0.4), (g, -0.3)):
        d = DisplacementOperator(coh=coh, scale=scale, metric=coh.metric)
        closed = vacuum_expectation(d, grid)
        (mat,), _, gram = _fock_setup([coh], [scale])
        dim = mat.shape[0]
        vac = np.zeros(dim)
        vac[0] = 1.0
        brute = complex((gram * vac) @ (mat @ vac))
        assert closed == pytest.approx(brute, abs=1e-8)


@pytest.mark.parametrize("make", [_hilbert_pair, _indefinite_pair])
def test_compose_matches_fock_matrix(make):
    grid, f, g = make()
    d1 = DisplacementOperator(coh=f, scale=0.35, metric=f.metric)
    d2 = DisplacementOperator(coh=g, scale=-0.27, metric=g.metric)
    composed = compose(d1, d2, grid)

    (m1, m2), ops, gram = _fock_setup([f, g], [d1.scale, d2.scale])
    amps1, _ = _active_modes(f)
    amps2, _ = _active_modes(g)
    keep = _mask_active([amps1, amps2])
    combined_amps = d1.scale * amps1[keep] + d2.scale * amps2[keep]
    m_combined = composed.phase * _displacement_matrix(1.0, combined_amps, ops)

    dim = m1.shape[0]
    vac = np.zeros(dim)
    vac[0] = 1.0
    direct = m1 @ (m2 @ vac)
    via_algebra = m_combined @ vac
    # truncation tails sit far below the 1e-8 comparison level
    assert np.max(np.abs(direct - via_algebra)) < 1e-8


@pytest.mark.parametrize("make", [_hilbert_pair, _indefinite_pair])
def test_isometry_on_single_photon_span(make):
    """<D a+_g vac, D a+_h vac> = kappa(g, h): displacements preserve the pairing."""
    grid, f, g = make()
    d = DisplacementOperator(coh=f, scale=0.4, metric=f.metric)
    amps_f, _ = _active_modes(f)
    amps_g, _ = _active_modes(g)
    keep = _mask_active([amps_f, amps_g])
    (mat,), ops, gram = _fock_setup([f], [d.scale])
    dim = mat.shape[0]
    vac = np.zeros(dim)
    vac[0] = 1.0

    a_g = sum(amps_g[keep][j] * ops[j][1] for j in range(len(ops)))
    a_f = sum(amps_f[keep][j] * ops[j][1] for j in range(len(ops)))
    left = mat @ (a_g @ vac)
    right = mat @ (a_f @ vac)
    moved = complex(np.conjugate(left) @ (gram * right))
    flat = complex(np.conjugate(a_g @ vac) @ (gram * (a_f @ vac)))
    assert moved == pytest.approx(flat, abs=1e-8)
    # and the flat pairing is the quadrature pairing used by the algebra
    assert flat == pytest.approx(complex(pairing(g, f, f.metric, grid)), abs=1e-10)


def test_inverse_yields_identity():
    grid, f, _ = _hilbert_pair()
    d = DisplacementOperator(coh=f, scale=0.7, metric="hilbert",
                             phase=complex(np.exp(0.3j)))
    ident = compose(d, inverse(d), grid)
    assert ident.phase == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(ident.coh.eval(np.zeros((2, 3))))) < 1e-15
    assert vacuum_expectation(ident, grid) == pytest.approx(1.0, abs=1e-12)


def test_self_composition_doubles():
    grid, f, _ = _hilbert_pair()
    d = DisplacementOperator(coh=f, scale=0.5, metric="hilbert")
    doubled = compose(d, d, grid)
    assert doubled.phase == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(doubled.coh.eval(np.zeros((2, 3))),
                               2.0 * d.scale * f.eval(np.zeros((2, 3))), rtol=1e-14)


def test_commutator_phase_from_antisymmetric_part():
    grid, f, g = _hilbert_pair()
    d1 = DisplacementOperator(coh=f, scale=0.4, metric="hilbert")
    d2 = DisplacementOperator(coh=g, scale=0.8, metric="hilbert")
    kappa = pairing(f, g, "hilbert", grid)
    composed = compose(d1, d2, grid)
    assert composed.phase == pytest.approx(
        complex(np.exp(-1j * d1.scale * d2.scale * kappa.imag)), abs=1e-14)

    # purely real pairing -> no commutator phase
    f_re = ArrayCoherence(((0.3, 0.1), (0.2, 0.4)), "hilbert")
    g_re = ArrayCoherence(((0.5, -0.2), (0.1, 0.3)), "hilbert")
    d3 = DisplacementOperator(coh=f_re, scale=0.4, metric="hilbert")
    d4 = DisplacementOperator(coh=g_re, scale=0.8, metric="hilbert")
    assert compose(d3, d4, grid).phase == pytest.approx(1.0, abs=1e-14)


def test_weyl_relation():
    grid, f, g = _hilbert_pair()
    d1 = DisplacementOperator(coh=f, scale=0.4, metric="hilbert")
    d2 = DisplacementOperator(coh=g, scale=0.8, metric="hilbert")
    fg = compose(d1, d2, grid)
    gf = compose(d2, d1, grid)
    kappa = pairing(f, g, "hilbert", grid)
    ratio = fg.phase / gf.phase
    assert ratio == pytest.approx(
        complex(np.exp(-2j * d1.scale * d2.scale * kappa.imag)), abs=1e-13)


def test_group_law_associativity():
    grid, f, g = _hilbert_pair()
    h = ArrayCoherence(((0.12 - 0.4j, 0.33), (-0.2, 0.1j)), "hilbert")
    rng = np.random.default_rng(7)
    for _ in range(4):
        s1, s2, s3 = rng.uniform(-1, 1, size=3)
        d1 = DisplacementOperator(coh=f, scale=s1, metric="hilbert")
        d2 = DisplacementOperator(coh=g, scale=s2, metric="hilbert")
        d3 = DisplacementOperator(coh=h, scale=s3, metric="hilbert")
        left = compose(compose(d1, d2, grid), d3, grid)
        right = compose(d1, compose(d2, d3, grid), grid)
        assert left.phase == pytest.approx(right.phase, abs=1e-12)
        np.testing.assert_allclose(left.coh.eval(np.zeros((2, 3))),
                                   right.coh.eval(np.zeros((2, 3))), atol=1e-12)


def test_hilbert_vacuum_bound_and_indefinite_witness():
    grid_h, f, _ = _hilbert_pair()
    d = DisplacementOperator(coh=f, scale=0.9, metric="hilbert",
                             phase=complex(np.exp(1.1j)))
    assert abs(vacuum_expectation(d, grid_h)) <= 1.0 + 1e-14

    grid_i = ModeGrid(1)
    scalar = ArrayCoherence(((0.6, 0.0, 0.0, 0.0),), "indefinite")
    d_scalar = DisplacementOperator(coh=scalar, scale=0.5, metric="indefinite")
    assert vacuum_expectation(d_scalar, grid_i).real > 1.0


def test_metric_mismatch_and_index_mismatch():
    grid, f, _ = _hilbert_pair()
    _, fi, _ = _indefinite_pair()
    d_h = DisplacementOperator(coh=f, scale=0.4, metric="hilbert")
    d_i = DisplacementOperator(coh=fi, scale=0.4, metric="indefinite")
    with pytest.raises(MetricMismatch):
        compose(d_h, d_i, grid)
    with pytest.raises(MetricMismatch):
        DisplacementOperator(coh=f, scale=1.0, metric="indefinite")
    with pytest.raises(IndexMismatch):
        creation_factor(d_h, (0.1, 0.2, 0.3), 3)
    with pytest.raises(IndexMismatch):
        creation_factor(d_i, (0.1, 0.2, 0.3), 4)


def test_coherent_overlap_diagonal_is_unity(light_grid, dispersion, ff, kin_v):
    coh = CoherenceFunction("PFB", kin_v, dispersion, ff, regime="asymptotic")
    d = DisplacementOperator(coh=coh, scale=-kin_v.e, metric="hilbert")
    assert coherent_overlap(d, d, light_grid) == pytest.approx(1.0, abs=1e-12)


def test_n_photon_factorization(light_grid, dispersion, ff, kin_v):
    coh = CoherenceFunction("PFB", kin_v, dispersion, ff, regime="asymptotic")
    d = DisplacementOperator(coh=coh, scale=-kin_v.e, metric="hilbert")
    vac = vacuum_expectation(d, light_grid)
    photons = PhotonList.of(((0.2, 0.0, 0.1), 2), ((0.0, 0.3, 0.2), 1))
    elem = n_photon_element(d, photons, light_grid)
    singles = [creation_factor(d, k, idx) for k, idx in photons.entries]
    assert n_photon_element(d, PhotonList(), light_grid) == vac
    assert elem == pytest.approx(vac * singles[0] * singles[1], rel=1e-12)
    doubled = PhotonList.of(((0.2, 0.0, 0.1), 2), ((0.2, 0.0, 0.1), 2))
    ratio = n_photon_element(d, doubled, light_grid) / vac
    assert ratio == pytest.approx(singles[0] ** 2, rel=1e-12)


def test_adjoint_is_metric_inverse(light_grid, dispersion, ff, kin_v):
    coh = CoherenceFunction("PFB", kin_v, dispersion, ff, regime="finite_time",
                            t=1.5, eps=0.2)
    d = DisplacementOperator(coh=coh, scale=kin_v.e, metric="hilbert",
                             phase=complex(np.exp(0.7j)))
    ident = compose(adjoint(d), d, light_grid)
    assert vacuum_expectation(ident, light_grid) == pytest.approx(1.0, abs=1e-12)
