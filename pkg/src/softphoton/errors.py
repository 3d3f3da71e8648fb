"""Exception types shared across the package."""


class SoftPhotonError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveCutoff(SoftPhotonError):
    """Infrared cutoff (photon mass) must be strictly positive."""


class NonPhysicalVelocity(SoftPhotonError):
    """Particle speed must satisfy |v| < 1 in natural units."""


class ZeroMomentum(SoftPhotonError):
    """No transverse plane exists at k = 0."""


class GridTooCoarse(SoftPhotonError):
    """Half-resolution cross-check disagreed beyond the configured tolerance."""

    def __init__(self, full, half, rel_err, rtol):
        self.full = full
        self.half = half
        self.rel_err = rel_err
        self.rtol = rtol
        super().__init__(
            f"quadrature self-check failed: full={full!r} half={half!r} "
            f"rel_err={rel_err:.3e} > rtol={rtol:.3e}"
        )


class NonFiniteIntegrand(SoftPhotonError):
    """Integrand returned NaN or infinity at a quadrature node."""


class DegenerateDenominator(SoftPhotonError):
    """An energy denominator fell below the representable floor."""


class MetricMismatch(SoftPhotonError):
    """Displacement operators live over different metrics or component counts."""


class IndexMismatch(SoftPhotonError):
    """Photon polarization index incompatible with the operator's family."""


class ConfigInvalid(SoftPhotonError):
    """Experiment configuration failed validation.

    Carries the list of (field, message) diagnostics.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"{field}: {msg}" for field, msg in self.diagnostics)
        super().__init__(f"invalid configuration: {lines}")
