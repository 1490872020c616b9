"""Exception types raised across the package."""


class QkpbError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QkpbError, ValueError):
    pass


class ParseError(QkpbError, ValueError):
    """Malformed or invariant-violating instance file."""

    def __init__(self, message, *, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class BudgetExceeded(QkpbError, ValueError):
    """Problem size is beyond an exact kernel's enumeration budget."""


class CombinatorialBudget(BudgetExceeded):
    """Cut family enumeration would exceed the configured cap."""


class ConvergenceFailure(QkpbError, ArithmeticError):
    pass


class NotPositiveDefinite(QkpbError, ArithmeticError):
    pass


class SingularMatrix(QkpbError, ArithmeticError):
    pass


class NumericalFailure(QkpbError, ArithmeticError):
    pass


class Infeasible(QkpbError, ArithmeticError):
    """Relaxation has no feasible point. With valid cuts this signals a cut bug."""


class NoCoverExists(QkpbError, ValueError):
    """All items fit in the knapsack, so no cover inequality exists."""


class IncomparableFamilies(QkpbError, ValueError):
    pass


class DegenerateInput(QkpbError, ValueError):
    pass
