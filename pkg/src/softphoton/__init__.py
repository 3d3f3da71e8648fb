"""softphoton: a numerical laboratory for solvable infrared-QED models.

Four exactly solvable models of a charged particle coupled to soft photons
(dipole approximation in Coulomb and Feynman gauge; Bloch-Nordsieck expansion
in both gauges) are represented exactly as coherent displacement operators.
All infrared integrals, counterterms, amplitudes and convergence phenomena
are evaluated by deterministic quadrature.
"""

__version__ = "0.1.0"

from .coherence import CoherenceFunction, Kinematics, convergence_profile, l2_norm_sq
from .errors import (ConfigInvalid, DegenerateDenominator, GridTooCoarse,
                     IndexMismatch, MetricMismatch, NonFiniteIntegrand,
                     NonPhysicalVelocity, NonPositiveCutoff, SoftPhotonError,
                     ZeroMomentum)
from .models import ModelSpec, PhaseHistory, cancellation_scan, counterterm, \
    evolution_operator, moeller
from .momentum import Dispersion, FormFactor, QuadratureGrid, default_grid, \
    form_factor, integrate, omega
from .polarization import TransverseBasis, hilbert_inner, indefinite_inner, \
    transverse_basis
from .weyl import DisplacementOperator, PhotonList, adjoint, coherent_overlap, \
    compose, inverse, n_photon_element, vacuum_expectation

__all__ = [
    "CoherenceFunction", "Kinematics", "convergence_profile", "l2_norm_sq",
    "ModelSpec", "PhaseHistory", "cancellation_scan", "counterterm",
    "evolution_operator", "moeller",
    "Dispersion", "FormFactor", "QuadratureGrid", "default_grid",
    "form_factor", "integrate", "omega",
    "TransverseBasis", "hilbert_inner", "indefinite_inner", "transverse_basis",
    "DisplacementOperator", "PhotonList", "adjoint", "coherent_overlap",
    "compose", "inverse", "n_photon_element", "vacuum_expectation",
    "SoftPhotonError", "ConfigInvalid", "DegenerateDenominator", "GridTooCoarse",
    "IndexMismatch", "MetricMismatch", "NonFiniteIntegrand",
    "NonPhysicalVelocity", "NonPositiveCutoff", "ZeroMomentum",
]
