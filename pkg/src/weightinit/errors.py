"""Exception types raised across the package."""


class WeightInitError(Exception):
    """Base class for all package errors."""


class UnknownActivationError(WeightInitError, KeyError):
    pass


class NumericDomainError(WeightInitError, ValueError):
    """An argument is outside the domain where a formula is defined."""


class DegenerateActivationError(WeightInitError, ValueError):
    """The activation has zero slope at 0, so no finite weight variance exists."""


class WrongEngineError(WeightInitError, ValueError):
    """A propagation engine was asked to handle an activation it cannot."""


class NumericOverflowError(WeightInitError, ArithmeticError):
    """Propagated moments stopped being finite.

    ``layer`` is the 1-based index of the first layer with a non-finite value.
    """

    def __init__(self, message, layer):
        super().__init__(message)
        self.layer = layer


class InsufficientDataError(WeightInitError, ValueError):
    def __init__(self, message, minimum):
        super().__init__(message)
        self.minimum = minimum
