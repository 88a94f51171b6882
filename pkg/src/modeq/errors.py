"""Exception types shared across the package."""


class InputError(ValueError):
    """An argument fails validation (wrong dimension, bad range, unknown key)."""


class CapacityError(InputError):
    """An exact enumeration would exceed the supported outcome-space size."""


class DomainError(ValueError):
    """A mathematical precondition fails (non-PD matrix, non-PSD covariance)."""


class DivergenceError(RuntimeError):
    """A trajectory left the finite floats.

    Carries the step index (and path index, for Monte Carlo runs) at which
    the first non-finite component appeared.
    """

    def __init__(self, message: str, step_index: int, path_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index
        self.path_index = path_index
