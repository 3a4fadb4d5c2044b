"""Exception types shared across the package."""


class InvalidLatticeError(ValueError):
    """Lattice tuple violates the divisibility chain r_i | r_{i+1}."""


class InvalidMetricError(ValueError):
    """Matrix is not a valid metric: wrong rank, gray-zone singular values,
    or a corank-1 image that is not bracket generating."""


class NotBracketGeneratingError(ValueError):
    """Structure constants do not span the vertical complement."""


class RiemannianOnlyError(ValueError):
    """Operation is defined for corank-0 (Riemannian) metrics only."""


class SolverFailure(RuntimeError):
    """Boundary-value solver found no converged branch.

    Carries the best residual seen so the caller can distinguish
    "barely missed" from "hopeless".
    """

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual
