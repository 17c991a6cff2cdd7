"""Exception taxonomy shared by all modules.

The CLI maps these onto its stable exit codes: check failures and
numerical breakdowns exit 1, usage/precondition problems exit 2,
mathematical-domain violations exit 3.
"""


class DomainError(ValueError):
    """Input violates a mathematical domain requirement (e.g. N <= 0, non-PSD weight)."""


class PreconditionError(ValueError):
    """A run precondition cannot be satisfied (e.g. Fock cutoff below the tail rule)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or is too ill-conditioned to trust."""
