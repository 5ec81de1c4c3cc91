"""Exception hierarchy.

Physics-domain failures (an OPO that would not oscillate, a depleted pump)
derive from :class:`PhysicsDomainError`; malformed inputs derive from
:class:`ValidationError`. The CLI maps the two families to distinct exit codes.
"""


class OpoCascadeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(OpoCascadeError, ValueError):
    """Input outside the documented domain of an operation."""


class PhysicsDomainError(OpoCascadeError, ValueError):
    """Parameters are well formed but describe a non-oscillating system."""


class NotPositiveSemidefinite(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class NotPhysical(ValidationError):
    """A covariance violating the uncertainty relation (a symplectic eigenvalue below one)."""


class LabelError(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


class InvalidLoss(ValidationError):
    pass


class InvalidEigenvalue(ValidationError):
    pass


class ConfigError(ValidationError):
    """Configuration problems; ``problems`` lists every offending key."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class BelowThreshold(PhysicsDomainError):
    pass


class PumpDepleted(PhysicsDomainError):
    pass


class DerivedSigmaOutOfRange(PhysicsDomainError):
    """The pump reaching OPO number ``index`` (1-based) leaves it outside (1, 4)."""

    def __init__(self, index, sigma):
        self.index = index
        self.sigma = sigma
        super().__init__(
            f"derived pump level sigma_{index} = {sigma:.6g} is outside (1, 4)"
        )
