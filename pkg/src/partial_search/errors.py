"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric argument is outside the range an operation accepts."""


class CapacityError(InvalidParameterError):
    """A request would allocate more than the configured size cap."""


class UndefinedCollapseError(ValueError):
    """Collapse onto a measurement outcome that has zero probability."""


class SequenceSyntaxError(ValueError):
    """Malformed sequence text; ``position`` is the 0-based offending index."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")
