"""Exception types shared across the package."""

from __future__ import annotations


class QuadratureError(RuntimeError):
    """Quadrature failed to reach its tolerance within the iteration budget.

    ``estimate`` and ``error`` hold the best value reached and its error
    estimate, so callers can report a partial result.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class MapSpecError(ValueError):
    """Invalid boundary-map or field description; ``path`` is a JSON path."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class ConsistencyError(ArithmeticError):
    """A quantity that is positive for every valid homeomorphism was not."""
