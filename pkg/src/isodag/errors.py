"""Exception types shared across the package."""


class IsodagError(Exception):
    """Base class for all isodag errors."""


class CycleError(IsodagError):
    """Edge set contains a directed cycle.

    Carries ``witness``, a list of (tail, head) edges forming a cycle.
    """

    def __init__(self, witness):
        self.witness = list(witness)
        super().__init__(f"directed cycle: {self.witness}")


class SelfLoopError(IsodagError):
    pass


class NegativeLengthError(IsodagError):
    pass


class InfeasibleError(IsodagError):
    """A point violates strict feasibility of the barrier domain."""


class InfeasibilityPanic(IsodagError):
    """An interior-point iterate left the domain; indicates a broken
    solver contract upstream, not a user error."""


class SolverFailure(IsodagError):
    """Inner linear solver failed to meet its tolerance."""


class PreconditionError(IsodagError):
    pass


class ContractViolation(IsodagError):
    """A postcondition that should hold by construction was violated."""


class NonpositiveWeight(IsodagError):
    pass


class LengthMismatch(IsodagError):
    pass


class TooLarge(IsodagError):
    """Instance exceeds the size limit of a brute-force oracle."""


class NotAPath(IsodagError):
    pass


class NotPositiveDefinite(IsodagError):
    pass


class ParseError(IsodagError):
    """Malformed instance file; carries the 1-based line number."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")
