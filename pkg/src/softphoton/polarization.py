"""Transverse polarization bases and the two inner products on momentum space.

Coulomb-gauge quantities carry two transverse components per momentum;
covariant-gauge quantities carry four Lorentz components paired either with
the positive (Hilbert) product or with the indefinite product
``<f, g> = (f0, g0) - sum_i (fi, gi)``.

Functions of momentum are closures evaluated at quadrature nodes: an (N, 3)
array of momenta maps to an (N, C) array of complex component values.  They
are never stored on a grid, which keeps cutoffs and times exact parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroMomentum
from .momentum import integrate

# Minkowski metric signature (+,-,-,-); index 0 is the scalar component.
MINKOWSKI_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])

_PARALLEL_TOL = 1e-8


@dataclass(frozen=True)
class TransverseBasis:
    """Orthonormal pair spanning the plane transverse to one momentum."""

    eps1: np.ndarray
    eps2: np.ndarray


def transverse_basis(k) -> TransverseBasis:
    """Deterministic transverse basis at a single momentum.

    eps1 = normalize(z_hat x k_hat) and eps2 = k_hat x eps1; when k is within
    1e-8 of the z axis the reference switches to x_hat.  Raises
    :class:`ZeroMomentum` at k = 0.
    """
    k = np.asarray(k, dtype=float)
    e1, e2 = transverse_basis_array(k.reshape(1, 3))
    return TransverseBasis(e1[0], e2[0])


def transverse_basis_array(k: np.ndarray, reference: np.ndarray | None = None):
    """Vectorized transverse bases for an (N, 3) array of momenta.

    Returns (eps1, eps2), each (N, 3).  ``reference`` overrides the primary
    reference axis (default z_hat); the fallback axis is chosen orthogonal to
    it.  Physical results must not depend on this choice.
    """
    k = np.asarray(k, dtype=float)
    norm = np.linalg.norm(k, axis=1)
    if np.any(norm == 0.0):
        raise ZeroMomentum("transverse basis undefined at k = 0")
    khat = k / norm[:, None]

    if reference is None:
        ref = np.array([0.0, 0.0, 1.0])
        alt = np.array([1.0, 0.0, 0.0])
    else:
        ref = np.asarray(reference, dtype=float)
        ref = ref / np.linalg.norm(ref)
        alt = np.array([1.0, 0.0, 0.0])
        if abs(ref @ alt) > 0.9:
            alt = np.array([0.0, 0.0, 1.0])

    cross = np.cross(np.broadcast_to(ref, khat.shape), khat)
    cnorm = np.linalg.norm(cross, axis=1)
    near_axis = cnorm < _PARALLEL_TOL
    if np.any(near_axis):
        cross_alt = np.cross(np.broadcast_to(alt, khat.shape), khat)
        cross = np.where(near_axis[:, None], cross_alt, cross)
        cnorm = np.linalg.norm(cross, axis=1)
    eps1 = cross / cnorm[:, None]
    eps2 = np.cross(khat, eps1)
    return eps1, eps2


def _component_values(f, k):
    vals = np.asarray(f(k))
    if vals.ndim == 1:
        vals = vals[:, None]
    return vals


def hilbert_inner(f, g, grid) -> complex:
    """Positive scalar product: integral of sum_c conj(f_c) g_c over momentum."""

    def integrand(k):
        fv = _component_values(f, k)
        gv = _component_values(g, k)
        return np.sum(np.conjugate(fv) * gv, axis=1)

    return integrate(integrand, grid)


def indefinite_inner(f, g, grid) -> complex:
    """Indefinite pairing (f0, g0) - sum_i (fi, gi) on 4-component functions."""

    def integrand(k):
        fv = _component_values(f, k)
        gv = _component_values(g, k)
        if fv.shape[1] != 4 or gv.shape[1] != 4:
            raise ValueError("indefinite pairing needs 4 Lorentz components")
        return np.sum(MINKOWSKI_SIGNS * np.conjugate(fv) * gv, axis=1)

    return integrate(integrand, grid)


def majorant_inner(f, g, grid) -> complex:
    """Hilbert majorant of the indefinite product (all component signs +)."""
    return hilbert_inner(f, g, grid)


def minkowski_dot(a, b) -> float:
    """Four-vector dot product with signature (+,-,-,-)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a[0] * b[0] - a[1:] @ b[1:])
