"""Exception hierarchy shared by every module."""


class TodaError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(TodaError, ValueError):
    """A variable, index, or lattice size is outside its valid range."""


class SingularEvaluationError(TodaError, ArithmeticError):
    """A rational expression was evaluated where its denominator vanishes."""


class SingularStructureError(TodaError, ArithmeticError):
    """A symbolic matrix that must be inverted has zero determinant."""


class NotHamiltonianError(TodaError):
    """The gradient field of a level has nonzero curl."""


class GaugeError(TodaError):
    """A recovered Hamiltonian still depends explicitly on time."""


class StiffnessError(TodaError, RuntimeError):
    """The adaptive integrator's step fell below the underflow threshold."""


class KernelError(TodaError, AssertionError):
    """An internal self-check failed; indicates a bug in the symbolic kernel."""
