"""Exception hierarchy shared by the compiled and pure-Python kernels."""


class QLimitError(Exception):
    """Base class for every error raised by qlimit."""


class QDomainError(QLimitError, ValueError):
    """A parameter or outcome lies outside the domain of an operation."""


class ConvergenceError(QLimitError, ArithmeticError):
    """An infinite product did not converge within the allowed number of terms."""


class OutOfSupportError(QDomainError):
    """The shifted Stieltjes-Wigert argument is nonpositive, so the
    approximation is undefined at this outcome (this is not probability zero)."""


class EnumerationSizeError(QDomainError):
    """An exact enumeration would exceed the configured point cap."""
