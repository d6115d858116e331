"""Exception hierarchy shared by every regint module."""


class RegintError(Exception):
    """Base class for all library errors."""


class DomainError(RegintError, ValueError):
    """An argument lies outside the domain where a map or function is defined."""


class QuadratureError(RegintError, ArithmeticError):
    """Adaptive quadrature failed to meet its tolerance within the evaluation budget."""

    def __init__(self, message, value=None, error_estimate=None, evaluations=0):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class BudgetExceeded(QuadratureError):
    """The evaluation budget ran out before the requested tolerance was reached."""


class MismatchedMapError(RegintError, ValueError):
    """Two second-type termination functions were built over different changes of variable."""


class ExprError(RegintError):
    """Base class for expression front-end errors."""


class ExprSyntaxError(ExprError, SyntaxError):
    """Malformed expression text.

    ``offset_0`` is 0-based; ``line`` and ``column`` are 1-based.  (``offset``
    itself belongs to :class:`SyntaxError` and is left to it.)
    """

    def __init__(self, message, text, offset, expected=()):
        self.text_source = text
        self.offset_0 = offset
        self.expected = tuple(expected)
        line = text.count("\n", 0, offset) + 1
        last_nl = text.rfind("\n", 0, offset)
        self.line = line
        self.column = offset - last_nl
        detail = f"line {self.line}, column {self.column} (offset {offset}): {message}"
        if self.expected:
            detail += "; expected one of: " + ", ".join(self.expected)
        super().__init__(detail)


class UnboundSymbolError(ExprError, NameError):
    """An expression references a symbol that has no binding."""

    def __init__(self, name):
        super().__init__(f"unbound symbol '{name}'")
        self.name = name


class EvaluationError(ExprError, ArithmeticError):
    """A domain violation (log of a nonpositive value, division by zero, ...) during evaluation."""

    def __init__(self, operation, operand):
        self.operation = operation
        self.operand = operand
        super().__init__(f"evaluation error in '{operation}' at operand {operand!r}")
