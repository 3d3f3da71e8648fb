"""Model assembly: counterterms, adiabatic phases, evolution and Moller operators.

Each of the four families (PFB, PFBR in the dipole approximation; BN_C, BN_F
in the Bloch-Nordsieck expansion) yields an interaction-picture evolution
operator that is exactly a phase times a coherent displacement.  The phase
carries a secular 1/eps piece which the family's mass counterterm cancels;
that cancellation is what makes the large-time + adiabatic double limit (the
Moller operator) finite, and it is probed directly by ``cancellation_scan``.

Sign conventions.  The finite-time displacement sign is fixed by the
interaction term of each Hamiltonian (plus e for PFB and BN_C, minus e for
PFBR and BN_F); Moller operators are the metric adjoints of the large-time
limits, which matches the standard scattering-theory definition and flips
the displacement sign.  Modulus-level results are independent of this
choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import (CoherenceFunction, Kinematics, metric_of)
from .errors import NonPositiveCutoff
from .momentum import Dispersion, FormFactor, form_factor, integrate, omega
from .weyl import DisplacementOperator, from_coherence

EVOLUTION_SIGN = {"PFB": 1.0, "PFBR": -1.0, "BN_C": 1.0, "BN_F": -1.0}

COUNTERTERM_KIND = {"PFB": "z", "PFBR": "z", "BN_C": "z1", "BN_F": "z2"}


@dataclass(frozen=True)
class ModelSpec:
    """One model at one external-leg kinematics.

    ``eps`` is the adiabatic switching rate.  eps = 0 is legal for finite-time
    evolution only; Moller construction requires the switching to be present
    (the limits are taken analytically afterwards).
    """

    family: str
    kin: Kinematics
    dispersion: Dispersion
    ff: FormFactor
    eps: float = 0.1

    def __post_init__(self):
        if self.family not in EVOLUTION_SIGN:
            raise ValueError(f"unknown family {self.family!r}")
        if self.eps < 0.0 or not math.isfinite(self.eps):
            raise ValueError("adiabatic rate eps must be finite and >= 0")

    @property
    def metric(self) -> str:
        return metric_of(self.family)

    def coherence(self, **regime) -> CoherenceFunction:
        return CoherenceFunction(self.family, self.kin, self.dispersion, self.ff,
                                 **regime)


@dataclass(frozen=True)
class Counterterm:
    kind: str   # z | z1 | z2
    value: float


def _rho2_integral(spec: ModelSpec, grid, weight) -> float:
    """integral rho^2(k) * weight(w, vk) d3k, with vk = w - k.v."""
    v = spec.kin.v_arr

    def integrand(k):
        w = omega(k, spec.dispersion)
        vk = w - k @ v
        return form_factor(k, spec.ff) ** 2 * weight(w, vk)

    return float(integrate(integrand, grid).real)


def counterterm(spec: ModelSpec, grid) -> Counterterm:
    """Family mass-counterterm coefficient.

    z  = (2/3m) int rho^2 / w^2          (dipole models)
    z1 = (1/3)  int rho^2 / (w (v.k))    (BN, Coulomb gauge)
    z2 = (1/2)  int rho^2 / (w (v.k))    (BN, Feynman gauge) = 3/2 z1
    """
    if spec.dispersion.lam <= 0.0:
        raise NonPositiveCutoff("counterterms need lam > 0")
    kind = COUNTERTERM_KIND[spec.family]
    if kind == "z":
        val = (2.0 / (3.0 * spec.kin.m)) * _rho2_integral(spec, grid, lambda w, vk: 1.0 / w**2)
    elif kind == "z1":
        val = (1.0 / 3.0) * _rho2_integral(spec, grid, lambda w, vk: 1.0 / (w * vk))
    else:
        val = 0.5 * _rho2_integral(spec, grid, lambda w, vk: 1.0 / (w * vk))
    return Counterterm(kind, val)


def counterterm_coefficient(spec: ModelSpec, grid, z_value: float | None = None) -> float:
    """The c-number coefficient multiplying exp(-2 eps |t|) in the Hamiltonian."""
    e = spec.kin.e
    if z_value is None:
        z_value = counterterm(spec, grid).value
    if spec.family == "PFB":
        return z_value * e**2 * spec.kin.m * spec.kin.speed**2 / 2.0
    if spec.family == "PFBR":
        return -0.75 * e**2 * spec.kin.m * z_value
    if spec.family == "BN_C":
        return e**2 * z_value * spec.kin.speed**2
    return -(e**2) * z_value * spec.kin.minkowski_v_sq


def phase_coefficients(family: str, kin: Kinematics, z_value: float):
    """(secular d-term coefficient, counterterm-ramp coefficient) per family."""
    e = kin.e
    if family == "PFB":
        return e**2 * kin.speed**2 / 3.0, e**2 * z_value * kin.m * kin.speed**2 / 2.0
    if family == "PFBR":
        return -(e**2) / 2.0, -0.75 * e**2 * kin.m * z_value
    if family == "BN_C":
        return e**2 * kin.speed**2 / 3.0, e**2 * z_value * kin.speed**2
    return -(e**2) * kin.minkowski_v_sq / 2.0, -(e**2) * z_value * kin.minkowski_v_sq


class PhaseHistory:
    """Closed-form adiabatic phases of one model's evolution operator.

    Evaluators for the secular integrals d(t) (dipole kernel) and d1(t)
    (BN kernel), the counterterm ramp zeta(t) = (e^{-2 eps t} - 1)/(2 eps),
    their t -> +-infinity limits at fixed eps, and the resulting unit-modulus
    phase factors.  For t < 0 every expression is the printed positive-time
    form with eps -> -eps.
    """

    def __init__(self, spec: ModelSpec, grid, z_value: float | None = None):
        self.spec = spec
        # the d-integrands carry sin(freq * t); the half-resolution self-check
        # trips spuriously at large t, so phases use an uncheck'd copy
        self.grid = grid.without_check() if hasattr(grid, "without_check") else grid
        self._z = counterterm(spec, grid).value if z_value is None else z_value

    @property
    def z_value(self) -> float:
        return self._z

    # -- secular integrals ---------------------------------------------------

    def _freq(self, k):
        w = omega(k, self.spec.dispersion)
        if self.spec.family in ("PFB", "PFBR"):
            return w, w
        return w, w - k @ self.spec.kin.v_arr

    def d_eps(self, t: float) -> float:
        """Secular phase integral of the model's kernel at time t."""
        eps = self.spec.eps if t >= 0 else -self.spec.eps
        ff = self.spec.ff

        def integrand(k):
            w, fr = self._freq(k)
            rho2 = form_factor(k, ff) ** 2
            if eps == 0.0:
                return rho2 / (w * fr) * (t - np.sin(fr * t) / fr)
            osc = math.exp(-eps * t) * np.sin(fr * t)
            ramp = fr * (math.exp(-2.0 * eps * t) - 1.0) / (2.0 * eps)
            return -rho2 / (w * (fr**2 + eps**2)) * (osc + ramp)

        return float(integrate(integrand, self.grid).real)

    def d_eps_limit(self, branch: int) -> float:
        """t -> branch * infinity limit of d_eps at fixed eps > 0."""
        eps = self.spec.eps
        if eps <= 0.0:
            raise ValueError("the large-time limit of d_eps needs eps > 0")
        ff = self.spec.ff

        def integrand(k):
            w, fr = self._freq(k)
            return form_factor(k, ff) ** 2 * fr / (w * (fr**2 + eps**2))

        return branch / (2.0 * eps) * float(integrate(integrand, self.grid).real)

    def zeta(self, t: float) -> float:
        eps = self.spec.eps if t >= 0 else -self.spec.eps
        if eps == 0.0:
            return -t
        return (math.exp(-2.0 * eps * t) - 1.0) / (2.0 * eps)

    def zeta_limit(self, branch: int) -> float:
        if self.spec.eps <= 0.0:
            raise ValueError("the large-time limit of zeta needs eps > 0")
        return -branch / (2.0 * self.spec.eps)

    # -- family phase assembly ------------------------------------------------

    def argument(self, t: float, z_value: float | None = None) -> float:
        cd, cz = phase_coefficients(self.spec.family, self.spec.kin,
                                    self._z if z_value is None else z_value)
        return cd * self.d_eps(t) + cz * self.zeta(t)

    def argument_limit(self, branch: int, z_value: float | None = None) -> float:
        """Total limiting phase argument: secular d-term plus counterterm ramp.

        With the family's own counterterm the two 1/eps residues cancel and
        the result is O(eps); perturbing the counterterm reintroduces a 1/eps
        divergence.
        """
        cd, cz = phase_coefficients(self.spec.family, self.spec.kin,
                                    self._z if z_value is None else z_value)
        return cd * self.d_eps_limit(branch) + cz * self.zeta_limit(branch)

    def phase(self, t: float) -> complex:
        return complex(np.exp(1j * self.argument(t)))

    def phase_limit(self, branch: int) -> complex:
        return complex(np.exp(1j * self.argument_limit(branch)))


def evolution_operator(spec: ModelSpec, t: float, grid) -> DisplacementOperator:
    """Interaction-picture evolution operator at time t as a displacement."""
    coh = spec.coherence(regime="finite_time", t=float(t), eps=spec.eps)
    phase = PhaseHistory(spec, grid).phase(t) if t != 0.0 else 1.0 + 0.0j
    return from_coherence(coh, EVOLUTION_SIGN[spec.family] * spec.kin.e, phase)


def moeller(spec: ModelSpec, branch: str, grid,
            keep_adiabatic: bool = False) -> DisplacementOperator:
    """Moller operator: metric adjoint of the large-time evolution limit.

    branch '+' is the incoming-side operator (t -> -infinity data), '-' the
    outgoing one.  By default the adiabatic limit is taken analytically: the
    coherence function becomes i/frequency times the smearing and the phase
    collapses to 1 by counterterm cancellation.  With ``keep_adiabatic`` the
    fixed-eps asymptotic data is returned instead (used by order-of-limits
    and perturbative cross-checks).
    """
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    if spec.eps <= 0.0:
        raise ValueError("Moller construction requires an adiabatic switch eps > 0")
    time_branch = -1 if branch == "+" else 1
    eps = spec.eps if keep_adiabatic else 0.0
    coh = spec.coherence(regime="asymptotic", time_branch=time_branch, eps=eps)
    if keep_adiabatic:
        phase = complex(np.conjugate(PhaseHistory(spec, grid).phase_limit(time_branch)))
    else:
        phase = 1.0 + 0.0j
    return from_coherence(coh, -EVOLUTION_SIGN[spec.family] * spec.kin.e, phase)


def scan_components(spec: ModelSpec, eps_ladder, grid):
    """Counterterm value plus per-eps limiting blocks for cancellation scans.

    The counterterm integral does not depend on eps, so it is computed once;
    each ladder point then costs one secular-limit integral.  Returns
    (z_value, [(eps, d_limit, zeta_limit), ...]) for the t -> +infinity
    branch, from which arbitrary counterterm perturbations can be assembled
    without re-integrating.
    """
    ladder = [float(x) for x in eps_ladder]
    if any(x <= 0.0 for x in ladder):
        raise ValueError("eps ladder entries must be > 0")
    z_val = counterterm(spec, grid).value
    blocks = []
    for eps in ladder:
        spec_eps = ModelSpec(spec.family, spec.kin, spec.dispersion, spec.ff, eps=eps)
        hist = PhaseHistory(spec_eps, grid, z_value=z_val)
        blocks.append((eps, hist.d_eps_limit(1), hist.zeta_limit(1)))
    return z_val, blocks


def assemble_scan(spec: ModelSpec, z_value: float, blocks):
    """[(eps, argument), ...] from precomputed scan blocks."""
    cd, cz = phase_coefficients(spec.family, spec.kin, z_value)
    return [(eps, cd * d_lim + cz * zeta_lim) for eps, d_lim, zeta_lim in blocks]


def cancellation_scan(spec: ModelSpec, eps_ladder, grid,
                      counterterm_scale: float = 1.0,
                      counterterm_kind: str | None = None):
    """Limiting phase argument along a decreasing eps ladder.

    Returns [(eps, argument), ...] for the t -> +infinity branch.  With the
    model's own counterterm the sequence converges with Cauchy differences
    O(eps); scaling the counterterm (negative control) or substituting the
    other gauge's kind makes |argument| grow like 1/eps.
    """
    z_val, blocks = scan_components(spec, eps_ladder, grid)
    if counterterm_kind is not None and counterterm_kind != COUNTERTERM_KIND[spec.family]:
        other = {"z1": "BN_C", "z2": "BN_F"}[counterterm_kind]
        z_val = counterterm(ModelSpec(other, spec.kin, spec.dispersion, spec.ff,
                                      eps=blocks[0][0]), grid).value
    return assemble_scan(spec, counterterm_scale * z_val, blocks)
