"""Exception hierarchy shared across the package."""


class SumRuleError(Exception):
    """Base class for all package errors."""


class DomainError(SumRuleError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularPoint(DomainError):
    """A closed form was requested at a point where it is singular."""


class DensityValidationError(SumRuleError, ValueError):
    pass


class PositivityViolation(DensityValidationError):
    def __init__(self, message, theta=None, phi=None, value=None):
        super().__init__(message)
        self.theta = theta
        self.phi = phi
        self.value = value


class RealityViolation(DensityValidationError):
    def __init__(self, message, index=None, partner=None):
        super().__init__(message)
        self.index = index
        self.partner = partner


class NonConverged(SumRuleError, RuntimeError):
    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class UnsupportedOrder(SumRuleError, ValueError):
    pass


class NotPositiveDefinite(SumRuleError, ArithmeticError):
    pass
