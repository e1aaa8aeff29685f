"""Exception and warning types."""


class ItoarError(Exception):
    """Base class for errors raised by this package."""


class InvalidInput(ItoarError, ValueError):
    pass


class SingularMatrix(ItoarError, ArithmeticError):
    """An exactly zero pivot was met during LU factorization."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ShiftSingular(SingularMatrix):
    """The shifted stiffness matrix is singular at the requested shift."""


class PoleHit(SingularMatrix):
    """The pencil s^2 M + s D + K is singular at the evaluation point."""


class DegenerateColumn(ItoarError, ArithmeticError):
    """A zero-norm U1 column was met in the weighted second-level sweep."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class SmallDiagonal(ItoarError, ArithmeticError):
    """A Gram diagonal entry fell below the degeneracy floor (Procedures 1/2)."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class BreakdownSignal(ItoarError):
    """The new subdiagonal entry is below the breakdown threshold.

    Carries the partially computed quantities so the driver can record them.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ParseError(ItoarError, ValueError):
    def __init__(self, message, line=None, path=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.path = path


class ConfigError(ItoarError, ValueError):
    pass


class IllConditionedWarning(UserWarning):
    """Estimated reciprocal condition number below 1e-15."""


class PseudoInverseUnstable(UserWarning):
    """A rank-deficient block made a backward-error pseudo-inverse unreliable."""


class IoError(ItoarError, OSError):
    pass
