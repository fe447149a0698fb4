"""Exception hierarchy shared by every module of the package."""


class TelegraphError(Exception):
    """Base class for all package errors."""


class ParameterError(TelegraphError, ValueError):
    pass


class NonPositiveParameter(ParameterError):
    def __init__(self, field: str, value: float):
        self.field = field
        self.value = value
        super().__init__(f"parameter {field!r} must be > 0, got {value!r}")


class DegenerateNoise(ParameterError):
    def __init__(self, mu: float, sigma: float):
        super().__init__(f"mu == sigma ({mu!r}) is not supported")


class RegimeError(TelegraphError):
    """Operation requested outside the parameter regime where it is defined."""


class SubCriticalError(RegimeError):
    """Discount rate too small: the value function is infinite."""

    def __init__(self, rho: float, critical: float):
        self.rho = rho
        self.critical = critical
        super().__init__(
            f"rho={rho!r} does not exceed the critical rate "
            f"mu - lambda + sqrt(sigma^2 + lambda^2) = {critical!r}"
        )


class RootFindingError(TelegraphError):
    pass


class BracketError(RootFindingError):
    pass


class DomainError(TelegraphError, ValueError):
    pass
