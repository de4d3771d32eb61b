"""Exception types shared across the toolchain."""

from __future__ import annotations


class MiniProcError(Exception):
    """Syntax or semantic error in subject-program source."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        loc = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{loc}{message}")


class FormatError(Exception):
    """Malformed artifact file (trace, plan, property, scenario, analysis)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class UsageError(Exception):
    """An operation was invoked with inputs that violate its contract."""
