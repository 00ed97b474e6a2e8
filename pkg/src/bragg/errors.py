"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ``DomainError`` and its subclasses give 2,
``CapacityError`` gives 3.
"""


class BraggError(Exception):
    pass


class DomainError(BraggError, ValueError):
    """Inputs outside an operation's domain (mixed radicands, bad windows, ...)."""


class ValidationError(DomainError):
    pass


class IncompleteDataError(DomainError):
    """A requested interval reaches beyond the certified window of a patch."""


class UndefinedStatisticError(DomainError):
    pass


class EmptySpectrumError(DomainError):
    pass


class ScenarioError(DomainError):
    """A verification scenario whose precondition does not hold."""


class CapacityError(BraggError, ArithmeticError):
    """Exact integers or enumeration boxes grew past the configured capacity."""
