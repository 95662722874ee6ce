"""Exception hierarchy shared by the solver modules and the CLI."""

from __future__ import annotations


class KPError(Exception):
    """Base class for all errors raised by :mod:`kpsplit`."""


class InvalidArgument(KPError, ValueError):
    """An argument is out of range, of the wrong shape, or not finite."""


class NumericalFailure(KPError, ArithmeticError):
    """A computation could not be completed (the CLI maps this to exit code 2)."""


class StepRejected(NumericalFailure):
    """Characteristics cross inside one cell during a single sLdG step.

    The forward image of a cell has non-positive length, which means the time
    step is too large for a shock-free substep.
    """

    def __init__(self, cell: int, row: int | None = None, time: float | None = None):
        self.cell = cell
        self.row = row
        self.time = time
        msg = f"cell image inverted at cell {cell}"
        if row is not None:
            msg += f", row {row}"
        if time is not None:
            msg += f", t={time:.17g}"
        super().__init__(msg)

    def at_time(self, time: float) -> "StepRejected":
        return StepRejected(self.cell, self.row, time)


class SingularJacobian(NumericalFailure):
    """Newton's denominator ``1 + tau * u'(alpha)`` vanished."""

    def __init__(self, x: float | None = None, row: int | None = None):
        self.x = x
        self.row = row
        where = "" if x is None else f" at x={x:.17g}"
        if row is not None:
            where += f", row {row}"
        super().__init__("singular Newton Jacobian" + where)


class Divergence(NumericalFailure):
    """A time integrator produced non-finite values."""

    def __init__(self, step: int, stage: str = ""):
        self.step = step
        self.stage = stage
        extra = f" ({stage})" if stage else ""
        super().__init__(f"non-finite state at step {step}{extra}")
