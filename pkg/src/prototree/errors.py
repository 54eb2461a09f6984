"""Exception types shared across the package."""


class InputMismatchError(ValueError):
    """An expression referenced a variable the input does not provide."""


class ParseError(ValueError):
    """Malformed expression text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NoSolutionError(RuntimeError):
    """Queried a prototype tree that has not evaluated any instance yet."""


class UnknownProblemError(LookupError):
    """Requested a benchmark problem that is not registered."""
