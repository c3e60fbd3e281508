"""Exception hierarchy.

Errors fall into three families so that callers (the CLI in particular) can
map them onto exit codes: configuration problems, bad input data, and
numerical failures.
"""


class MeraWaveError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MeraWaveError, ValueError):
    """Invalid configuration value or unknown configuration key."""


class DataError(MeraWaveError, ValueError):
    """Input data does not satisfy an operation's preconditions."""


class NumericalError(MeraWaveError, ArithmeticError):
    """A numerical procedure could not produce a well-defined result."""


class OddLength(DataError):
    pass


class NonFinite(DataError):
    pass


class LengthMismatch(DataError):
    pass


class IndivisibleLength(DataError):
    def __init__(self, n: int, levels: int):
        super().__init__(f"length {n} is not divisible by 2**{levels}")
        self.n = n
        self.levels = levels


class ShapeMismatch(DataError):
    pass


class NotOrthogonal(DataError):
    pass


class NonOrthonormalFilters(DataError):
    pass


class MissingReconstruction(DataError):
    pass


class TooShort(DataError):
    pass


class TooFlat(DataError):
    pass


class EmptySeries(DataError):
    pass


class AllZeroReference(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row: int, message: str = ""):
        text = f"row {row}: {message}" if message else f"row {row}"
        super().__init__(text)
        self.row = row


class SingularMatrix(NumericalError):
    def __init__(self, message: str, iteration: int | None = None, level: int | None = None):
        if iteration is not None or level is not None:
            message = f"{message} (iteration={iteration}, level={level})"
        super().__init__(message)
        self.iteration = iteration
        self.level = level


class NonPositiveDefinite(NumericalError):
    pass
