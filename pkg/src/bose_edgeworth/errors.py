"""Exception and warning types shared across the package."""


class BoseEdgeworthError(Exception):
    """Base class for package errors."""


class NonConvergenceError(BoseEdgeworthError):
    """Iterative solver exhausted its budget; carries the best residual seen."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DiagonalizationError(BoseEdgeworthError):
    """Quadratic Hamiltonian is gapless or not diagonalizable by the square-root method."""


class LengthGuardError(BoseEdgeworthError):
    """Wick expectation requested for more than 12 operators."""


class DimensionGuardError(BoseEdgeworthError):
    """Requested many-body basis exceeds the desk-scale dimension cap."""


class PermutationGuardError(BoseEdgeworthError):
    """Excited-state polynomial requested for more than 6 quasi-particles."""


class SignChangeError(BoseEdgeworthError):
    """Power-law fit input changes sign, log-log fit undefined."""


class IllConditionedError(BoseEdgeworthError):
    """Extrapolation design matrix condition number above 1e12."""


class PhaseAmbiguityError(BoseEdgeworthError):
    """Eigenvector phase alignment failed: reference overlap below 0.5."""


class SigmaDegenerateError(BoseEdgeworthError):
    """Limiting variance is zero: the condensate is an eigenstate of the observable."""


class ConfigError(BoseEdgeworthError):
    """Experiment configuration is malformed or out of documented ranges."""


class TruncationWarning(UserWarning):
    """Fock truncation visibly affects the requested quantity."""


class QuadratureWarning(UserWarning):
    """Doubling the quadrature nodes moved the result by more than 1e-8."""


class MultipleMinimaWarning(UserWarning):
    """Random restarts of the Hartree solver disagree beyond 10x tolerance."""


class SigmaDegenerateWarning(UserWarning):
    """sigma < 1e-10: CLT hypothesis (phi not an eigenstate of B) violated."""
