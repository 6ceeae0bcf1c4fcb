"""Exception and warning types raised by cavion."""


class CavionError(Exception):
    """Base class for simulator errors."""


class InvalidArgument(CavionError, ValueError):
    """A precondition on an argument was violated."""


class NumericFailure(CavionError, ArithmeticError):
    """A numerical routine produced non-finite values or failed to converge."""


class DegenerateStateError(CavionError):
    """A superposition cancelled to (numerically) zero norm."""


class EmptyBranchError(CavionError):
    """A measurement branch has vanishing probability."""


class InternalError(CavionError):
    """A construction invariant failed; indicates a bug."""


class TruncationWarning(UserWarning):
    """Population reached the top Fock levels of the truncated space."""
