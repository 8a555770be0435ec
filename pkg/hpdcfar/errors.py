""" Exceptions and warnings raised by hpdcfar.
"""
from typing import Optional, Sequence


class HpdCfarError(Exception):
    """ Base class for every error raised by the package.
    """


class InvalidInput(HpdCfarError, ValueError):
    """ Malformed arguments: shape mismatch, empty collections, out-of-range
        parameters or non-finite entries.
    """


class DomainError(HpdCfarError, ValueError):
    """ A matrix left the domain an operation requires (usually the HPD cone).

    Args:
        message (str): Human readable description.
        eigenvalue (float, optional): Offending (smallest) eigenvalue.
    """
    def __init__(self, message: str, eigenvalue: Optional[float] = None) -> None:
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NumericalFailure(HpdCfarError, ArithmeticError):
    """ An iteration or decomposition broke down.

    Args:
        message (str): Human readable description.
        trace (Sequence, optional): |Delta R| of every update before failure.
        iterates (Sequence, optional): Iterates leading up to the breakdown,
            ending with the last one computed.
    """
    def __init__(self, message: str, trace: Optional[Sequence] = None,
                 iterates: Optional[Sequence] = None) -> None:
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
        self.iterates = list(iterates) if iterates is not None else []


class SingularHessian(NumericalFailure):
    """ The influence linear system is too ill-conditioned to solve.
    """
    def __init__(self, message: str, condition: float) -> None:
        super().__init__(message)
        self.condition = condition


class DegenerateMedian(NumericalFailure):
    """ A median sits on a data point, where its gradient field is not smooth.
    """


class ConfigError(HpdCfarError, ValueError):
    """ Run configuration failed schema validation.

    Args:
        path (str): Dotted path of the offending field ('' for the document).
        message (str): What is wrong with it.
    """
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class CalibrationDegraded(UserWarning):
    """ More than 1% of the calibration trials of a detector were dropped.
    """
