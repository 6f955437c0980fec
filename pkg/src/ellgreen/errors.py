"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: InputError/DomainError -> 2,
HypothesisNotMet -> 3, verification failures -> 1.
"""


class InputError(ValueError):
    """Malformed arguments: wrong dimensions, bad parameter ranges, unsorted input."""


class DomainError(ValueError):
    """Point outside the domain required by the operation."""


class HypothesisNotMet(ValueError):
    """A construction's hypothesis gate failed; the request is refused, not broken."""


class InfeasibleCertificate(RuntimeError):
    """Certificate cannot be evaluated as a witness (infeasible or degenerate)."""


class InvariantViolation(RuntimeError):
    """An internal invariant that should be impossible to break was broken."""
