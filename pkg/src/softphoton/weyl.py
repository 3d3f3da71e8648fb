"""Exact algebra of coherent displacement operators.

A displacement operator is stored as ``phase * exp(i * scale * X(f))`` with
``X(f) = a_dag(f) + a(f_bar)`` and f a coherence function (2 transverse or 4
Lorentz components).  Operators are never realized as matrices: composition,
vacuum expectations, coherent overlaps and n-photon matrix elements all
reduce to the commutator pairing

    kappa(f, g) = [a(f_bar), a_dag(g)] = (f, g)        (Hilbert metric)
                                       = -<f, g>       (indefinite metric)

evaluated by quadrature.  The identities used are elementary consequences of
e^{A+B} = e^A e^B e^{-[A,B]/2} for a central commutator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IndexMismatch, MetricMismatch
from .polarization import MINKOWSKI_SIGNS, hilbert_inner, indefinite_inner

METRICS = ("hilbert", "indefinite")


@dataclass(frozen=True)
class PhotonList:
    """Ordered photon insertions: ((k_vec, index), ...).

    ``index`` is a polarization label: 1 or 2 for transverse families,
    a Lorentz index 0..3 for covariant ones.
    """

    entries: tuple = ()

    def __len__(self):
        return len(self.entries)

    @staticmethod
    def of(*entries) -> "PhotonList":
        norm = tuple((tuple(float(c) for c in k), int(idx)) for k, idx in entries)
        return PhotonList(norm)


@dataclass(frozen=True)
class _Combination:
    """Finite linear combination of coherence functions (closure algebra)."""

    terms: tuple  # ((weight, coh-like), ...)

    @property
    def ncomp(self):
        return self.terms[0][1].ncomp

    @property
    def metric(self):
        return self.terms[0][1].metric

    def eval(self, k):
        acc = None
        for w, coh in self.terms:
            v = w * coh.eval(k)
            acc = v if acc is None else acc + v
        return acc


@dataclass(frozen=True)
class DisplacementOperator:
    """phase * exp(i * scale * (a_dag(coh) + a(conj coh))) over one metric."""

    coh: object           # anything with .ncomp / .metric / .eval(k)
    scale: float
    metric: str
    phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        expected = 2 if self.metric == "hilbert" else 4
        if self.coh.ncomp != expected:
            raise MetricMismatch(
                f"{self.coh.ncomp}-component function under {self.metric} metric")


def from_coherence(coh, scale: float, phase: complex = 1.0 + 0.0j) -> DisplacementOperator:
    """Displacement with the metric dictated by the coherence function."""
    return DisplacementOperator(coh=coh, scale=float(scale),
                                metric=coh.metric, phase=complex(phase))


def pairing(f, g, metric: str, grid) -> complex:
    """Commutator pairing kappa(f, g) = [a(f_bar), a_dag(g)]."""
    if metric == "hilbert":
        return hilbert_inner(f.eval, g.eval, grid)
    return -indefinite_inner(f.eval, g.eval, grid)


def _check_compatible(d1: DisplacementOperator, d2: DisplacementOperator):
    if d1.metric != d2.metric or d1.coh.ncomp != d2.coh.ncomp:
        raise MetricMismatch(
            f"cannot combine {d1.metric}/{d1.coh.ncomp} with {d2.metric}/{d2.coh.ncomp}")


def compose(d1: DisplacementOperator, d2: DisplacementOperator, grid) -> DisplacementOperator:
    """Product d1 d2 as a single displacement.

    The exponents add (scales folded into a linear combination) and the
    central commutator contributes exp(-i s1 s2 Im kappa(f1, f2)) to the
    phase.
    """
    _check_compatible(d1, d2)
    kappa = pairing(d1.coh, d2.coh, d1.metric, grid)
    phase = d1.phase * d2.phase * np.exp(-1j * d1.scale * d2.scale * kappa.imag)
    combined = _Combination(((d1.scale, d1.coh), (d2.scale, d2.coh)))
    return DisplacementOperator(coh=combined, scale=1.0, metric=d1.metric,
                                phase=complex(phase))


def adjoint(d: DisplacementOperator) -> DisplacementOperator:
    """Metric dagger: conjugate the phase, flip the displacement sign."""
    return replace(d, phase=complex(np.conjugate(d.phase)), scale=-d.scale)


def inverse(d: DisplacementOperator) -> DisplacementOperator:
    return replace(d, phase=1.0 / d.phase, scale=-d.scale)


def vacuum_expectation(d: DisplacementOperator, grid) -> complex:
    """<vac, D vac> = phase * exp(-scale^2 kappa(f, f) / 2).

    Under the Hilbert metric kappa(f, f) = ||f||^2 >= 0 and the modulus is
    bounded by one; under the indefinite metric kappa(f, f) = -<f, f> has no
    sign, so scalar-dominant displacements push the expectation above one.
    """
    kappa = pairing(d.coh, d.coh, d.metric, grid)
    return complex(d.phase * np.exp(-0.5 * d.scale**2 * kappa))


def coherent_overlap(d_left: DisplacementOperator, d_right: DisplacementOperator,
                     grid) -> complex:
    """<D_left vac, D_right vac> in the operators' shared metric."""
    _check_compatible(d_left, d_right)
    return vacuum_expectation(compose(adjoint(d_left), d_right, grid), grid)


def creation_factor(d: DisplacementOperator, k, index: int) -> complex:
    """Single-photon creation bracket <k, index| D |vac> / <vac| D |vac>.

    Hilbert metric: i * scale * f_s(k) with s in {1, 2}; indefinite metric:
    -i * scale * f^mu(k) (the sign from contracting with -g^{mu nu}).
    """
    vals = d.coh.eval(np.asarray(k, dtype=float).reshape(1, 3))[0]
    if d.metric == "hilbert":
        if index not in (1, 2):
            raise IndexMismatch(f"transverse index must be 1 or 2, got {index}")
        comp = vals[index - 1]
    else:
        if index not in (0, 1, 2, 3):
            raise IndexMismatch(f"Lorentz index must be 0..3, got {index}")
        comp = -vals[index]
    return complex(1j * d.scale * comp)


def n_photon_element(d: DisplacementOperator, photons: PhotonList, grid) -> complex:
    """<Psi_{k1..kn}, D vac>: the vacuum expectation times one universal
    creation factor per photon (coherent-state factorization, exact)."""
    value = vacuum_expectation(d, grid)
    for k, index in photons.entries:
        value *= creation_factor(d, k, index)
    return complex(value)


def photon_norm_sign(metric: str, index: int) -> float:
    """Norm sign of the improper one-photon state (negative for scalars)."""
    if metric == "hilbert":
        return 1.0
    return -float(MINKOWSKI_SIGNS[index])
