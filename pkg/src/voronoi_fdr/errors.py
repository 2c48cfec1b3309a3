"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to:
2 for input validation failures, 3 for numerical failures and 4 for
configuration errors.
"""

from __future__ import annotations


class VoronoiFdrError(Exception):
    exit_code = 1


class InputError(VoronoiFdrError, ValueError):
    exit_code = 2


class NumericalError(VoronoiFdrError, ArithmeticError):
    exit_code = 3


class ConfigError(VoronoiFdrError, ValueError):
    exit_code = 4


class EmptyInput(InputError):
    pass


class OutOfDomain(InputError):
    pass


class DuplicatePoints(InputError):
    pass


class ParseError(InputError):
    pass


class DuplicateId(InputError):
    pass


class IndexMismatch(InputError):
    pass


class TooFewPoints(InputError):
    pass


class TooShort(InputError):
    pass


class ConstantSeries(InputError):
    pass


class NonPositiveArea(NumericalError):
    pass


class AreaSumMismatch(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class UnsupportedScheme(ConfigError):
    pass


class MissingEstimates(ConfigError):
    pass
