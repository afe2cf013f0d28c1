"""Error types shared across modules."""


class BudgetError(RuntimeError):
    """An exhaustive computation would exceed the configured k^n budget."""


class ParseError(ValueError):
    """A CSV input failed to parse; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
