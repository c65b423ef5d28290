"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: numerical/invariant failures -> 1,
unmet hypotheses and bad inputs -> 2, solver failures -> 3.
"""


class ToolkitError(Exception):
    """Base class for all toolkit failures."""


class InputError(ToolkitError, ValueError):
    """Malformed or out-of-contract input."""


class PreconditionError(InputError):
    """An operation's precondition does not hold for the given input."""


class ConfigurationError(InputError):
    """Invalid run configuration (grid too coarse, bad tolerances, ...)."""


class NumericalError(ToolkitError):
    """A numerical invariant or internal cross-check failed."""


class HypothesisError(ToolkitError):
    """A mathematical hypothesis required by a check is not met."""


class TransformDomainError(HypothesisError):
    """A point falls outside the domain of a monotone transform."""


class SingularTransformError(ToolkitError):
    """The transform derivative vanishes where strict monotonicity is required."""


class SolverError(ToolkitError):
    """An iterative solve failed to converge or left the admissible branch."""


class SourceError(SolverError):
    """The source term is nonpositive where positivity is required."""
