"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: validation and input
problems exit 2, numerical failures exit 3.
"""


class PavetsdError(Exception):
    """Base class for all package errors."""


class ValidationError(PavetsdError):
    """An input object violates one of its documented invariants."""


class ConfigError(ValidationError):
    """A configuration file or CLI argument cannot be used as given."""


class DatabaseFormatError(PavetsdError):
    """A database file is malformed (header, schema, ordering, row count)."""


class NumericalError(PavetsdError):
    """Base class for numerical failures in the response engine."""


class KernelConditioningError(NumericalError):
    """The per-wavenumber layer system could not be solved.

    Carries the offending wavenumber and the structure id so the failing
    case can be reproduced directly.
    """

    def __init__(self, message, wavenumber=None, structure_id=None):
        super().__init__(message)
        self.wavenumber = wavenumber
        self.structure_id = structure_id


class HankelConvergenceError(NumericalError):
    """The oscillatory quadrature did not converge within its node budget.

    ``partial_estimate`` holds the best accelerated estimate at abort time;
    ``evaluations`` the number of kernel evaluations spent.
    """

    def __init__(self, message, partial_estimate=None, evaluations=None):
        super().__init__(message)
        self.partial_estimate = partial_estimate
        self.evaluations = evaluations
