"""Exception types raised by the numerical kernels and checkers."""


class QPentagonError(Exception):
    """Base class for all errors raised by this package."""


class InvalidNome(QPentagonError, ValueError):
    pass


class NonconvergentTail(QPentagonError, ArithmeticError):
    """The truncation tail of an infinite product cannot be certified."""


class PoleHit(QPentagonError, ZeroDivisionError):
    """A Pochhammer denominator vanishes (or nearly so) at the evaluation point."""


class DecayViolation(QPentagonError, ArithmeticError):
    """Charge-shell contributions stopped decreasing at the edge of the window."""


class ConstraintViolation(QPentagonError, ValueError):
    """A balancing condition, modulus constraint or type invariant failed."""


class ExhaustedResampling(QPentagonError, RuntimeError):
    pass
