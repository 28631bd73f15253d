"""Exception hierarchy shared by all estimator modules."""


class TdoaError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TdoaError, ValueError):
    pass


class NumericalError(TdoaError):
    """A numerical failure (singular system, empty root set, ...)."""


class DegenerateGeometryError(NumericalError, ValueError):
    """Source coincides with a sensor or the reference, or geometry is unusable."""


class NotLocalizableError(NumericalError):
    """Fisher information (or M(x)) is singular at the queried position."""


class IllConditionedError(NumericalError):
    def __init__(self, message, condition):
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition


class InsufficientGeometryError(NumericalError):
    """Q = A~^T A~ / m is not positive definite."""


class EmptyRootSetError(NumericalError):
    def __init__(self, roots, sign_values):
        super().__init__(
            f"no admissible noise-variance root; roots={list(roots)}, "
            f"sign values={list(sign_values)}"
        )
        self.roots = list(roots)
        self.sign_values = list(sign_values)


class SchurDegeneracyError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass
