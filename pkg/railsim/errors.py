"""Exceptions raised by railsim.

Everything derives from `Error` so callers (the CLI in particular) can tell
simulator failures apart from programming errors.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function


class Error(Exception):
    pass


class ConfigError(Error, ValueError):
    """Thrown if user supplied configuration fails validation"""
    pass


class FockError(Error, ValueError):
    """Invalid operation on a truncated Fock-space state"""
    pass


class TruncationError(FockError):
    """An occupation exceeds n_max or the total photon number exceeds n_total_max"""
    pass


class CapacityError(FockError):
    """Too many modes for the configured maximum"""
    pass


class ShapeMismatchError(FockError):
    pass


class UnitarityError(FockError):
    pass


class OverOccupiedError(FockError):
    """The measured mode holds two or more photons.

    The adaptive phase measurement is only solved analytically on the
    subspace with at most one photon in the measured mode.
    """
    pass


class ImpossibleOutcomeError(Error):
    """Conditioning on an outcome of zero probability"""
    pass


class GridRangeError(Error):
    """The quadrature grid does not cover the state's probability mass"""
    pass


class IntegrationError(Error):
    """The trajectory state stopped being finite, usually because dt is too large"""

    def __init__(self, message, step=None):
        super(IntegrationError, self).__init__(message)
        self.step = step
