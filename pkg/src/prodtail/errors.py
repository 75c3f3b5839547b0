class ProdTailError(Exception):
    pass


class DomainError(ProdTailError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UsageError(ProdTailError, RuntimeError):
    """API misuse, such as evaluating a distribution that never passed validation."""


class ConstructionError(ProdTailError, ValueError):
    pass


class SpecError(ProdTailError, ValueError):
    """Malformed distribution spec; ``location`` is a JSON-pointer-like path."""

    def __init__(self, message, location=""):
        super().__init__(f"{location or '<root>'}: {message}")
        self.location = location


class ConstructionWarning(UserWarning):
    pass
