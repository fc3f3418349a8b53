"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI echoes it in its
machine-readable error object and uses ``infeasible`` to pick the exit status.
"""


class SolitonLabError(Exception):
    code = "SolitonLabError"
    infeasible = False


class InputError(SolitonLabError, ValueError):
    code = "InputError"


class Empty(InputError):
    code = "Empty"


class Unbounded(InputError):
    code = "Unbounded"


class NotFullDim(InputError):
    code = "NotFullDim"


class NotPointed(InputError):
    code = "NotPointed"


class NonGorenstein(InputError):
    code = "NonGorenstein"


class UnboundedSection(InputError):
    code = "UnboundedSection"


class OutsideReebCone(InputError):
    code = "OutsideReebCone"


class IrregularQuotient(InputError):
    code = "IrregularQuotient"


class ZeroVector(InputError):
    code = "ZeroVector"


class NotConcave(InputError):
    code = "NotConcave"


class NotConvex(InputError):
    code = "NotConvex"


class WeightNonpositive(InputError):
    code = "WeightNonpositive"


class WeightMismatch(InputError, TypeError):
    """A weight attached to one polytope was used on another."""

    code = "WeightMismatch"


class NumericalError(SolitonLabError, ArithmeticError):
    code = "NumericalError"


class NewtonDiverged(NumericalError):
    code = "NewtonDiverged"


class WeightDomain(NumericalError):
    code = "WeightDomain"


class QuadratureDiverged(NumericalError):
    code = "QuadratureDiverged"


class Infeasible(SolitonLabError):
    code = "Infeasible"
    infeasible = True


class EmptySlice(SolitonLabError):
    code = "EmptySlice"
    infeasible = True


class ObstructedFutaki(SolitonLabError):
    code = "ObstructedFutaki"
    infeasible = True
