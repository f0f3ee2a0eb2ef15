"""Exception hierarchy shared across modules.

The CLI maps these onto exit codes: ConfigError -> 1, DomainError (and
subclasses) -> 2, OSError -> 3.
"""


class HabitMotionError(Exception):
    pass


class ConfigError(HabitMotionError):
    """Invalid configuration or command-line usage."""


class DomainError(HabitMotionError):
    """Violated domain contract (bad category, broken invariant, ...)."""


class SchemaError(DomainError):
    """File does not match its declared schema."""


class InvariantError(DomainError):
    """Data violates a documented invariant; message carries the location."""


class UnknownCategoryError(DomainError):
    def __init__(self, label):
        super().__init__(f"unknown category: {label!r}")
        self.label = label
