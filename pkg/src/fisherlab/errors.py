"""Exception hierarchy for fisherlab."""


class FisherLabError(Exception):
    """Base class for every error raised by this package."""


class PotentialError(FisherLabError, ValueError):
    pass


class EmptyPotential(PotentialError):
    pass


class NotConfining(PotentialError):
    pass


class NumericalFailure(FisherLabError, RuntimeError):
    """Raised when an eigensolve or refinement loop cannot deliver."""


class ConvergenceFailure(NumericalFailure):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DomainExpansionFailure(NumericalFailure):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class MissingMoment(FisherLabError, KeyError):
    def __init__(self, k):
        super().__init__(k)
        self.k = k

    def __str__(self):
        return f"moment <x^{self.k}> is not available"


class MissingConstant(FisherLabError, KeyError):
    def __init__(self, k):
        super().__init__(k)
        self.k = k

    def __str__(self):
        return f"no constant supplied for power k={self.k}"


class PerturbationBreaksConfinement(PotentialError):
    def __init__(self, k, step):
        super().__init__(f"perturbing lambda_{k} by +-{step:g} leaves a non-confining potential")
        self.k = k
        self.step = step


class SingularJacobian(NumericalFailure):
    pass


class NonpositiveScale(FisherLabError, ValueError):
    pass


class NonpositiveD(FisherLabError, ValueError):
    def __init__(self, k, value):
        super().__init__(f"D_{k} = {value!r} must be positive")
        self.k = k


class NonpositiveConstant(FisherLabError, ValueError):
    pass


class AllZeroMultipliers(FisherLabError, ValueError):
    pass


class NoInteriorMinimum(NumericalFailure):
    pass


class ConfigError(FisherLabError, ValueError):
    pass
