"""Exception types raised by the solvers."""


class SolverError(RuntimeError):
    """Base class for numerical failures."""


class NonConvergence(SolverError):
    """Iteration budget exhausted before the residual target was met."""

    def __init__(self, message, best_residual=float("nan"), history=None):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual
        self.history = list(history or [])


class BlowUp(SolverError):
    """Iterate grew past the configured cap; try continuation."""


class PositivityLoss(SolverError):
    """Density lost positivity, usually an under-resolved drift."""


class NegativeV(SolverError):
    """Hopf-Cole flow left the positive cone."""


class DegenerateSource(ValueError):
    """Source norm too small for the estimate ratio to be defined."""
