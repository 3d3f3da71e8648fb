"""Photon momentum-space kinematics and the deterministic quadrature engine.

Every three-dimensional momentum integral in the package goes through
:func:`integrate`: a fixed product rule (Gauss-Legendre panels in the radial
direction, Gauss-Legendre in cos(theta), uniform in phi) with a compensated
reduction performed in one canonical node order.  Node evaluation may be
chunked across worker threads (``SOFTPHOTON_THREADS``), but the reduction
order never changes, so results are bit-identical for any thread count.

Units are natural (hbar = c = 1).  The photon carries a fictitious mass
``lam`` so that omega(k) = sqrt(|k|^2 + lam^2); the massless limit is only
ever probed by scanning ``lam`` downward, never by evaluating at zero.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GridTooCoarse, NonFiniteIntegrand, NonPositiveCutoff

_EVAL_CHUNK = 1 << 16  # nodes per evaluation chunk (fixed: part of the canonical order)


@dataclass(frozen=True)
class Dispersion:
    """Massive photon dispersion omega(k) = sqrt(|k|^2 + lam^2), lam > 0."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0.0) or not math.isfinite(self.lam):
            raise NonPositiveCutoff(f"photon mass must be > 0, got {self.lam!r}")


@dataclass(frozen=True)
class FormFactor:
    """Rotationally invariant charge form factor, normalized to 1 at k = 0.

    Only the gaussian family is implemented: rho(k) = exp(-|k|^2 / (2 uv_scale^2)).
    """

    uv_scale: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unknown form factor kind {self.kind!r}")
        if not (self.uv_scale > 0.0) or not math.isfinite(self.uv_scale):
            raise ValueError(f"uv_scale must be > 0, got {self.uv_scale!r}")


def omega(k, dispersion: Dispersion):
    """Photon energy sqrt(|k|^2 + lam^2) for one 3-momentum or an (N, 3) array."""
    k = np.asarray(k, dtype=float)
    k2 = np.sum(k * k, axis=-1)
    return np.sqrt(k2 + dispersion.lam**2)


def form_factor(k, ff: FormFactor):
    """Evaluate the form factor at one 3-momentum or an (N, 3) array."""
    k = np.asarray(k, dtype=float)
    k2 = np.sum(k * k, axis=-1)
    return np.exp(-k2 / (2.0 * ff.uv_scale**2))


def _gauss_panel(lo: float, hi: float, n: int):
    """Gauss-Legendre nodes/weights mapped onto [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class QuadratureGrid:
    """Product quadrature for integrals over R^3 in spherical coordinates.

    The canonical node order is radial panel, radial node within the panel,
    cos(theta) node, phi node, flattened in that nesting.  ``weights`` already
    include the k^2 Jacobian, so integrate(g) = sum_i w_i g(k_i).

    ``check_rtol`` enables a built-in half-resolution cross check: the same
    integrand is also summed on a companion grid with half the nodes in every
    direction and a disagreement beyond ``check_rtol`` (relative, with
    ``check_atol`` absolute floor) raises :class:`GridTooCoarse`.
    """

    radial_panels: tuple  # ((k_lo, k_hi, n_nodes), ...)
    n_costheta: int
    n_phi: int
    check_rtol: float | None = 1e-6
    check_atol: float = 1e-12
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        edges = []
        for lo, hi, n in self.radial_panels:
            if not (0.0 < lo < hi):
                raise ValueError(f"bad radial panel ({lo}, {hi}, {n})")
            if n < 2:
                raise ValueError("radial panels need at least 2 nodes")
            edges.append((lo, hi))
        for (a, b), (c, d) in zip(edges, edges[1:]):
            if not c >= b:
                raise ValueError("radial panel edges must be increasing")
        if self.n_costheta < 2 or self.n_phi < 1:
            raise ValueError("angular node counts too small")

    # -- node construction -------------------------------------------------

    def _build(self, radial_panels, n_costheta, n_phi):
        ks, wks = [], []
        for lo, hi, n in radial_panels:
            x, w = _gauss_panel(lo, hi, n)
            ks.append(x)
            wks.append(w)
        k = np.concatenate(ks)
        wk = np.concatenate(wks)
        c, wc = np.polynomial.legendre.leggauss(n_costheta)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        wphi = np.full(n_phi, 2.0 * np.pi / n_phi)

        sin_t = np.sqrt(1.0 - c**2)
        # canonical nesting: radial (outer), costheta, phi (inner)
        kx = np.einsum("r,c,p->rcp", k, sin_t, np.cos(phi))
        ky = np.einsum("r,c,p->rcp", k, sin_t, np.sin(phi))
        kz = np.einsum("r,c,p->rcp", k, c, np.ones(n_phi))
        nodes = np.stack([kx, ky, kz], axis=-1).reshape(-1, 3)
        weights = np.einsum("r,c,p->rcp", wk * k**2, wc, wphi).reshape(-1)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        return nodes, weights

    @property
    def nodes(self) -> np.ndarray:
        """(N, 3) array of momentum nodes in canonical order."""
        if "nodes" not in self._cache:
            n, w = self._build(self.radial_panels, self.n_costheta, self.n_phi)
            self._cache["nodes"], self._cache["weights"] = n, w
        return self._cache["nodes"]

    @property
    def weights(self) -> np.ndarray:
        """(N,) array of quadrature weights (k^2 Jacobian included)."""
        self.nodes
        return self._cache["weights"]

    @property
    def half_nodes(self):
        if "half_nodes" not in self._cache:
            panels = tuple((lo, hi, max(2, n // 2)) for lo, hi, n in self.radial_panels)
            n, w = self._build(panels, max(2, self.n_costheta // 2), max(1, self.n_phi // 2))
            self._cache["half_nodes"], self._cache["half_weights"] = n, w
        return self._cache["half_nodes"]

    @property
    def half_weights(self):
        self.half_nodes
        return self._cache["half_weights"]

    def without_check(self) -> "QuadratureGrid":
        """Copy of this grid with the half-resolution cross check disabled."""
        g = replace(self, check_rtol=None)
        g._cache.update(self._cache)
        return g

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.nodes).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        h.update(repr((self.n_costheta, self.n_phi, self.check_rtol)).encode())
        return h.hexdigest()[:16]

    # -- integration -------------------------------------------------------

    def _evaluate(self, g, nodes) -> np.ndarray:
        """Evaluate g chunk by chunk, optionally on worker threads.

        Chunk boundaries and result placement are fixed by the canonical node
        order, so the assembled value array does not depend on the worker count.
        """
        n = nodes.shape[0]
        chunks = [(i, min(i + _EVAL_CHUNK, n)) for i in range(0, n, _EVAL_CHUNK)]
        workers = _thread_count()
        if workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda ab: np.asarray(g(nodes[ab[0]:ab[1]])), chunks))
        else:
            parts = [np.asarray(g(nodes[a:b])) for a, b in chunks]
        vals = np.concatenate(parts)
        if vals.shape != (n,):
            raise ValueError(f"integrand returned shape {vals.shape}, expected ({n},)")
        return vals

    def _reduce(self, vals, weights) -> complex:
        if not np.all(np.isfinite(vals.view(float) if np.iscomplexobj(vals) else vals)):
            raise NonFiniteIntegrand("integrand returned NaN or inf at a quadrature node")
        prod = vals * weights
        if np.iscomplexobj(prod):
            return complex(math.fsum(prod.real.tolist()), math.fsum(prod.imag.tolist()))
        return complex(math.fsum(prod.tolist()), 0.0)

    def integrate(self, g) -> complex:
        """Integrate g over R^3.  g maps an (N, 3) node array to (N,) values."""
        full = self._reduce(self._evaluate(g, self.nodes), self.weights)
        if self.check_rtol is not None:
            half = self._reduce(self._evaluate(g, self.half_nodes), self.half_weights)
            err = abs(full - half)
            scale = max(abs(full), abs(half))
            if err > self.check_rtol * scale + self.check_atol:
                raise GridTooCoarse(full, half, err / scale if scale else math.inf,
                                    self.check_rtol)
        return full


def integrate(g, grid) -> complex:
    """Deterministic quadrature of ``g`` over R^3 on ``grid``.

    ``grid`` only needs an ``integrate`` method, which keeps the displacement
    algebra testable against tiny hand-built mode sets.
    """
    return grid.integrate(g)


def _thread_count() -> int:
    raw = os.environ.get("SOFTPHOTON_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def default_grid(dispersion: Dispersion, ff: FormFactor,
                 n_panels: int = 24, n_radial: int = 16,
                 n_costheta: int = 64, n_phi: int = 32,
                 check_rtol: float | None = 1e-6) -> QuadratureGrid:
    """Geometric radial panels from lam*1e-3 up to 10*uv_scale.

    The low edge sits three decades below the photon mass so the infrared
    region k ~ lam is fully resolved; the high edge sits where the gaussian
    form factor has decayed to ~1e-44.
    """
    lo = dispersion.lam * 1e-3
    hi = 10.0 * ff.uv_scale
    if not lo < hi:
        raise ValueError(f"degenerate radial range [{lo}, {hi}]")
    edges = np.geomspace(lo, hi, n_panels + 1)
    panels = tuple((float(a), float(b), n_radial) for a, b in zip(edges, edges[1:]))
    return QuadratureGrid(panels, n_costheta, n_phi, check_rtol=check_rtol)
