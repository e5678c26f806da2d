"""Exception hierarchy for the qheat numerical kernels."""


class QHeatError(Exception):
    """Base class for all qheat numerical failures."""


class ConditionLoss(QHeatError):
    """Alternating-sum cancellation exceeded the condition threshold.

    The caller should fall back to the all-positive hypergeometric path or
    request an extended-precision evaluation.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SeriesNonConvergent(QHeatError):
    """The transformed hypergeometric series is outside its convergence disk."""


class TruncationFailure(QHeatError):
    """A series tail bound was not met within the iteration cap."""


class ConvergenceDomainError(QHeatError):
    """Complex characteristic-function argument outside the valid strip."""


class AliasingDetected(QHeatError):
    """Mass at the lattice boundary exceeds the tail tolerance; enlarge k_max."""


class StepRejected(QHeatError):
    """Half-step integrator certificate failed; a smaller step is required."""


class CumulantMismatch(QHeatError):
    """Closed-form cumulant disagrees with the differentiated characteristic
    function beyond tolerance."""


class InsufficientSupport(QHeatError):
    """Too few paired lattice masses to test the fluctuation theorem."""
