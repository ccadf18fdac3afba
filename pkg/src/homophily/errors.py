"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class HomophilyError(Exception):
    """Base class for all errors raised by this package."""


# -- input validation ---------------------------------------------------------


class ValidationError(HomophilyError, ValueError):
    """An input violates a documented invariant."""


class NegativeCell(ValidationError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"negative cell at ({row}, {col}): {value!r}")


class NonFiniteCell(ValidationError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"non-finite cell at ({row}, {col}): {value!r}")


class EmptyTable(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class ParseError(HomophilyError):
    """A file could not be parsed; carries the 1-based line and column."""

    def __init__(self, message, line=None, col=None, path=None):
        self.line, self.col, self.path = line, col, path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if col is not None:
            where.append(f"col {col}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


# -- table statistics ----------------------------------------------------------


class NotTwoByTwo(HomophilyError, ValueError):
    pass


class NotSquare(HomophilyError, ValueError):
    pass


class DegenerateMargins(HomophilyError, ValueError):
    """A dichotomized table has a zero or full margin, so LL is undefined."""


class DivisionByZero(HomophilyError, ZeroDivisionError):
    pass


# -- transformations -----------------------------------------------------------


class ZeroRowWithPositiveTarget(HomophilyError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"row {index} is all zero but its target sum is positive")


class ZeroColWithPositiveTarget(HomophilyError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"column {index} is all zero but its target sum is positive")


class MaxIterationsExceeded(HomophilyError, RuntimeError):
    def __init__(self, iterations, residual):
        self.iterations, self.residual = iterations, residual
        super().__init__(
            f"IPF did not converge after {iterations} iterations "
            f"(max margin residual {residual:.3g})"
        )


class InfeasibleResult(HomophilyError, ValueError):
    """The NM construction produced a negative cell."""

    def __init__(self, cell, value):
        self.cell, self.value = cell, value
        super().__init__(f"NM result has negative cell {cell}: {value!r}")


# -- inference ---------------------------------------------------------------


class OutOfDomain(HomophilyError, ValueError):
    pass


class AlphaMismatch(HomophilyError, ValueError):
    pass


class RhoOutOfRange(HomophilyError, ValueError):
    pass


class KindMismatch(HomophilyError, ValueError):
    pass


class ZeroSigma(HomophilyError, ValueError):
    pass


class ZeroDensity(HomophilyError, ValueError):
    pass


class NoOverlap(HomophilyError, ValueError):
    pass
