"""Error taxonomy shared by the numerical modules and the command line.

Each category carries the process exit code the CLI reports for it.
"""

from typing import Optional


class HPKernelError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.key = key

    def __str__(self) -> str:
        if self.key:
            return f"{self.key}: {self.message}"
        return self.message


class UsageError(HPKernelError):
    exit_code = 2


class DomainError(HPKernelError):
    """An argument lies outside the region where the formula is defined."""

    exit_code = 3


class NotDefined(HPKernelError):
    """The requested polynomial or kernel form does not exist for these parameters."""

    exit_code = 4


class PolePassed(HPKernelError):
    exit_code = 5


class NoConvergence(HPKernelError):
    exit_code = 6


class ImaginaryLeak(HPKernelError):
    """A quantity that must be real kept a non-negligible imaginary part."""

    exit_code = 7


class Underflow(HPKernelError):
    exit_code = 8


class NegativeDeterminant(HPKernelError):
    exit_code = 9


class NonPositive(HPKernelError):
    exit_code = 10


class EigenFailure(HPKernelError):
    exit_code = 11


class NotInHalfplane(HPKernelError):
    exit_code = 12


class NotSorted(HPKernelError):
    exit_code = 13


class TruncationInsufficient(HPKernelError):
    exit_code = 14


class DegenerateSpectrum(HPKernelError):
    exit_code = 15
