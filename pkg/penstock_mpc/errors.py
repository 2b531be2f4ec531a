class PenstockError(Exception):
    """Base class for every error raised by penstock_mpc."""


class ParameterError(PenstockError, ValueError):
    pass


class InstabilityError(PenstockError):
    pass


class InfeasibleOperatingPoint(PenstockError):
    pass


class DiscretizationError(PenstockError):
    pass


class LossOfSynchronism(PenstockError):
    pass


class TuningError(PenstockError):

    def __init__(self, message, best=None):
        super().__init__(message)
        # best candidate found before the search gave up
        self.best = best


class QpConstructionError(PenstockError, ValueError):
    pass


class FilterError(PenstockError):
    pass


class UndefinedMetricError(PenstockError, ValueError):
    pass


class ComparisonError(PenstockError):
    pass


class IngestionError(PenstockError, ValueError):

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ConfigError(PenstockError, ValueError):
    pass
