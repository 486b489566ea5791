"""Exception hierarchy shared by all entop modules."""


class EntopError(Exception):
    """Base class for every error raised by entop."""


class DimensionMismatch(EntopError, ValueError):
    pass


class NotHermitian(EntopError, ValueError):
    pass


class NotPSD(EntopError, ValueError):
    pass


class MismatchedParties(EntopError, ValueError):
    pass


class EmptyTermList(EntopError, ValueError):
    pass


class Annihilated(EntopError, ArithmeticError):
    """The operator maps the input state to (numerically) zero."""


class ZeroSuccess(EntopError, ArithmeticError):
    """Post-selection never fires for the given configuration."""


class NotDiagonal(EntopError, ArithmeticError):
    pass


class NotInformationallyComplete(EntopError, ValueError):
    pass


class InputSetDegenerate(EntopError, ValueError):
    pass


class WrongDimension(EntopError, ValueError):
    pass


class BasisMismatch(EntopError, ValueError):
    pass


class ConfigError(EntopError, ValueError):
    pass


class ParseError(ConfigError):
    """Operator-spec syntax error; ``position`` is the 0-based column."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at column {position}\n  {text}\n  {pointer}")
