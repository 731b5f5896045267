"""Exception hierarchy shared across the package."""


class CMTorsionError(Exception):
    """Base class for all errors raised by cmtorsion."""


class ShapeError(CMTorsionError, ValueError):
    pass


class ContractError(CMTorsionError, ValueError):
    pass


class ConvergenceError(CMTorsionError):
    def __init__(self, msg, iterations=None):
        super().__init__(msg)
        self.iterations = iterations


class SingularityError(CMTorsionError):
    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


class SpectraOverlapError(CMTorsionError):
    pass


class CutCollisionError(CMTorsionError):
    """A spectral cut lies on (or too close to) the spectrum."""

    def __init__(self, msg, eigenvalue=None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class SplitError(CMTorsionError):
    pass


class DegeneracyError(CMTorsionError):
    pass


class NotAcyclicError(CMTorsionError):
    pass


class FeasibilityError(CMTorsionError, ValueError):
    pass


class FluxDegreeError(CMTorsionError, ValueError):
    pass


class ClosednessError(CMTorsionError):
    pass


class InvolutionError(CMTorsionError):
    pass


class ParityError(CMTorsionError, ValueError):
    pass


class MetricError(CMTorsionError, ValueError):
    pass


class RestrictionError(CMTorsionError):
    pass


class StencilError(CMTorsionError):
    pass


class ValidationError(CMTorsionError):
    pass
