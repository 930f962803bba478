"""Exception types raised by the numerical routines."""


class BlowUpError(ArithmeticError):
    """A Riccati flow exploded before the requested horizon."""

    def __init__(self, message, blowup_time=None):
        super().__init__(message)
        self.blowup_time = blowup_time


class ConvergenceError(RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    ``bracket`` holds the last interval known to contain the solution.
    """

    def __init__(self, message, bracket=None, iterations=None):
        if bracket is not None:
            message = f"{message} (bracket [{bracket[0]!r}, {bracket[1]!r}])"
        super().__init__(message)
        self.bracket = bracket
        self.iterations = iterations
