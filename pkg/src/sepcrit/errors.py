class ValidationError(ValueError):
    """Input that violates a documented precondition."""


class ConvergenceError(ArithmeticError):
    """An iterative kernel hit its sweep cap without converging."""
