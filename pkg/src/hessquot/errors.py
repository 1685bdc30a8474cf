"""Exception types shared across the package."""


class HessquotError(Exception):
    """Base class for all package-specific errors."""


class NotInConeError(HessquotError):
    """A vector required to lie in the cone Gamma_k does not."""


class NotPositiveConeError(HessquotError):
    """A vector required to lie in the positive cone has a nonpositive entry."""


class ZeroVectorError(HessquotError):
    """A direction vector that must be nonzero is (numerically) zero."""


class NotAdmissibleError(HessquotError):
    """A matrix/spectrum fails the admissibility requirements (sigma_k = sigma_l,
    positive spectrum, or decay exponent > 2)."""


class NoConvergenceError(HessquotError):
    """The Jacobi eigensolver did not converge within its sweep cap."""


class NotOrthogonalError(HessquotError):
    """A matrix expected to be orthogonal is not, within tolerance."""


class StepFailureError(HessquotError):
    """The adaptive ODE integrator stalled (invalid profile coefficients)."""


class DivergentTailError(HessquotError):
    """The tail integral diverges because the decay exponent is <= 2."""


class InsideExcludedRegionError(HessquotError):
    """Evaluation requested inside the excluded ellipsoidal core."""


class NoTouchingQuadraticError(HessquotError):
    """The shift schedule exhausted without producing a quadratic that touches
    the boundary data from below (domain insufficiently convex or mesh too
    coarse; refine and retry)."""


class CTooSmallError(HessquotError):
    """The prescribed asymptotic constant c is below the computed threshold."""

    def __init__(self, c: float, c_tilde: float):
        self.c = c
        self.c_tilde = c_tilde
        super().__init__(
            f"asymptotic constant c = {c:.17g} is below the computed "
            f"threshold c_tilde = {c_tilde:.17g}; the construction requires "
            f"c >= c_tilde"
        )


class HypothesisViolatedError(HessquotError):
    """Boundary ordering required by a comparison check fails, so the interior
    conclusion cannot be tested."""
