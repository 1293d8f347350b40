"""Exception hierarchy.

Every numerical failure mode raised by this package derives from
FgnlsError, so callers (and the CLI) can map them to exit codes.
"""


class FgnlsError(Exception):
    """Base class for all package errors."""


class ConfigError(FgnlsError):
    """Malformed or inconsistent run configuration."""


class PipelineError(FgnlsError):
    """Wraps a module error with provenance for CLI reporting."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


# -- spectrum ---------------------------------------------------------------

class OrderingViolation(FgnlsError):
    """Band edges do not strictly interleave."""


class LengthMismatch(FgnlsError):
    """Phase vector length does not equal the genus."""


class BranchPointEvaluation(FgnlsError):
    """Evaluation requested at (or on) a branch cut without a side flag."""


# -- surface ----------------------------------------------------------------

class SingularNormalization(FgnlsError):
    """The a-period Gram matrix is numerically singular."""


class NonPositiveImaginaryPart(FgnlsError):
    """Im B is not positive definite (quadrature or branch error)."""


class TruncationInsufficient(FgnlsError):
    """Requested theta tail bound unreachable at the maximum radius."""


class RootNotBracketed(FgnlsError):
    """A divisor root is missing from its gap."""


class PathThroughCut(FgnlsError):
    """Internal Abel-map path construction failure."""


# -- phase ------------------------------------------------------------------

class SingularConditionSystem(FgnlsError):
    """The linear system for the phase-integral numerators is singular."""


class NoAdmissibleRoot(FgnlsError):
    """No saddle root in the interval dictated by the monotone branch."""


class WrongRegime(FgnlsError):
    """Edge/saddle variant inconsistent with the supplied velocity."""


# -- background -------------------------------------------------------------

class ThetaDenominatorZero(FgnlsError):
    """A theta denominator vanished at the requested point."""


# -- scattering -------------------------------------------------------------

class EdgeTooClose(FgnlsError):
    """Spectral sample too close to a band edge for the ODE transport."""


class StiffIntegration(FgnlsError):
    """Step control of the Jost transport failed."""


class SpectralSingularity(FgnlsError):
    """S11 or S22 vanished (excluded by assumption, detected anyway)."""


class ProfileViolation(FgnlsError):
    """Synthetic reflection profile violates its analytic contract."""


class RegionMismatch(FgnlsError):
    """Operation requested outside its asymptotic region."""


# -- deltas -----------------------------------------------------------------

class MomentSystemSingular(FgnlsError):
    """The band moment system for the delta constants is singular."""


class InsufficientCoverage(FgnlsError):
    """Scattering data does not cover the delta integration range."""


class OnContour(FgnlsError):
    """Delta evaluation requested on the integration contour."""


class MissingScatteringCoverage(FgnlsError):
    """Asymptotics requested without scattering data for the region."""


# -- painleve34 -------------------------------------------------------------

class NewtonDiverged(FgnlsError):
    """Newton iteration for the Painleve XXXIV solve did not converge."""


class SingularJacobian(FgnlsError):
    """Collocation Jacobian singular during the Newton solve."""


class OutOfTable(FgnlsError):
    """Query outside the tabulated Painleve XXXIV domain."""


# -- nls_direct -------------------------------------------------------------

class StabilityViolation(FgnlsError):
    """Time step violates the documented stability margin."""


class AliasingDetected(FgnlsError):
    """Spectral tail exceeded its aliasing threshold during evolution."""


class GridMismatch(FgnlsError):
    """Field snapshots with incompatible grids."""
