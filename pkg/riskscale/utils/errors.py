from __future__ import annotations


class RiskScaleError(Exception):
    """Base riskscale error."""

    exit_code: int = 1


class ValidationError(RiskScaleError):
    """Invalid model, parameter or claim-law input."""

    exit_code = 2


class ConfigError(ValidationError):
    """Model configuration or manifest could not be read or parsed."""


class DomainError(ValidationError):
    """Argument outside the domain of a Lambert-W branch."""


class UnsupportedError(ValidationError):
    """Operation is not defined for this model (e.g. diffusion or non-exponential claims)."""


class NumericError(RiskScaleError):
    """Numerical failure while evaluating or optimizing."""

    exit_code = 3


class PoleError(NumericError):
    """Claim transform evaluated at one of its poles."""


class MultiplicityError(NumericError):
    """Repeated Cramer-Lundberg roots."""


class InvalidApproximationError(NumericError):
    """Exponential surrogate has a nonpositive rate or premium."""


class NoRuinFormulaError(NumericError):
    """Surrogate loading is not positive, ruin is certain."""


class DegeneratePolicyError(NumericError):
    """Denominator of the policy value is not positive."""


class InfeasibleError(NumericError):
    """Lambert-W argument out of range while solving for the injection level."""


class NoPenaltyError(NumericError):
    """No bankruptcy penalty makes the given barrier critical."""


class KcUndefinedError(NumericError):
    """Critical injection cost does not exist for this penalty."""

    def __init__(self, message: str, p_lower: float):
        super().__init__(message)
        self.p_lower = p_lower


class ReproFailure(NumericError):
    """A reproduction target has failing cells."""
