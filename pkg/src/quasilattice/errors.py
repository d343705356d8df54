"""Exception hierarchy shared by all quasilattice modules."""


class QuasilatticeError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class OnGridLine(QuasilatticeError):
    pass


class IrregularIntersection(QuasilatticeError):
    pass


class IrregularPentagrid(QuasilatticeError):
    """A triple (or higher) line intersection was found inside the patch."""

    def __init__(self, message, point=None, lines=None):
        super().__init__(message)
        self.point = point
        self.lines = lines


class EmptyWindow(QuasilatticeError):
    pass


class ModulusOutOfRange(QuasilatticeError):
    pass


class PoleAt(QuasilatticeError):
    pass


class BaseCaseUnavailable(QuasilatticeError):
    pass


class NumericallyIllConditioned(QuasilatticeError):
    pass


class NotConverged(QuasilatticeError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class TooLarge(QuasilatticeError):
    pass


class MixedParity(QuasilatticeError):
    pass


class TruncationExceedsPatch(QuasilatticeError):
    pass
