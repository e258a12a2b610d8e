"""Exception hierarchy. Every computational failure derives from CmpkitError."""


class CmpkitError(Exception):
    """Base class for computation errors (CLI exit code 1)."""


class DomainError(CmpkitError, ValueError):
    """Evaluation point on or outside the prism boundary."""


class UnsaturatedError(CmpkitError, ValueError):
    """FMR radicand negative: the sample is not saturated at this field."""

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"sample unsaturated at applied field {field!r} T")


class UnstableRegimeError(CmpkitError, ValueError):
    """Lower polariton radicand negative (normal-phase Dicke instability)."""


class PhaseValidityError(CmpkitError, ValueError):
    """Superradiant branches requested with g/omega <= 0.5."""


class SingularDiamagneticError(CmpkitError, ValueError):
    """Diamagnetic term D = g^2/omega_m diverges at zero magnon frequency."""


class UndefinedFillingFactorError(CmpkitError, ValueError):
    """Filling factor requested for an all-zero field map."""


class RankDeficiencyError(CmpkitError, ValueError):
    """Singular normal equations or degenerate regression design."""

    def __init__(self, message, parameter=None):
        self.parameter = parameter
        super().__init__(message)


class FitInputError(CmpkitError, ValueError):
    """Fit problem fails its preconditions (too few points, missing branch)."""
