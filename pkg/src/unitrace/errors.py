"""Exception hierarchy shared by all unitrace modules."""


class UnitraceError(Exception):
    """Base class for all errors raised by this package."""


class InvariantViolation(UnitraceError):
    """A domain value failed one of its structural invariants."""


class ShapeError(UnitraceError):
    """Two values live over incompatible algebra shapes."""


class BranchCutError(UnitraceError):
    """A principal logarithm hit an eigenvalue at (or too close to) -1."""


class ResolutionError(UnitraceError):
    """A sampled path is too coarse for the requested operation."""


class NotALoopError(UnitraceError):
    """A winding-number extraction did not land on an integer."""


class NotCircleValuedError(UnitraceError):
    """A homomorphism does not map scalar unitaries to scalars."""


class InconsistencyError(UnitraceError):
    """Two computations that must agree did not."""


class WellDefinednessError(UnitraceError):
    """An induced map failed its well-definedness audit."""


class ConvergenceError(UnitraceError):
    """An adaptive scheme exhausted its iteration budget."""


class SingularError(UnitraceError):
    """An input that must be invertible is (numerically) singular."""


class NoDualError(UnitraceError):
    """No dual simplex map exists (the affine map is not unital positive)."""


class DslError(UnitraceError):
    """A homomorphism expression failed validation."""


class ParseError(UnitraceError):
    """Syntax error in a homomorphism expression or config file."""

    def __init__(self, message, line=1, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigError(UnitraceError):
    """An analysis configuration could not be understood."""
