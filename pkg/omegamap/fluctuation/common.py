import logging
from typing import Any, Callable, Sequence, Tuple
import numpy as np
from ..errors import ConvergenceError, ValidationError
from ..model import MatrixGrid

logger = logging.getLogger(__name__)

# lengths above the anchor at which c -> infinity limits are sampled
LIMIT_SCHEDULE = (8.0, 16.0, 32.0, 64.0)
LIMIT_TOL = 1e-7


def value_at(grid: MatrixGrid, t: float) -> np.ndarray:
    """
    Grid value at t, with the zero matrix left of the grid origin.

    Args:
        grid (MatrixGrid): Matrix-valued grid, zero to the left of its origin.
        t (float): Evaluation point.

    Returns:
        np.ndarray: The N x N value at t.
    """
    if t <= grid.x0:
        return np.zeros((grid.n_states, grid.n_states)) if t < grid.x0 else grid.values[0].copy()
    return grid.at(t)


def check_ordered(lower: float, x: float, upper: float, names: str = "d <= x <= c") -> None:
    """
    Reject levels that are not ordered lower <= x <= upper.

    Args:
        lower (float): Lower level.
        x (float): Starting level.
        upper (float): Upper level.
        names (str): How the levels are named in the error. Defaults to "d <= x <= c".

    Raises:
        ValidationError: With code "invalid_levels" when the order fails.
    """
    if not lower <= x <= upper:
        raise ValidationError(f"need {names}, got {lower}, {x}, {upper}", code="invalid_levels")


def converge_limit(
    evaluate: Callable[[float], Tuple[np.ndarray, Any]],
    what: str,
    schedule: Sequence[float] = LIMIT_SCHEDULE,
    tol: float = LIMIT_TOL,
) -> Tuple[np.ndarray, Any]:
    """
    Evaluate a c -> infinity limit along a doubling truncation schedule, stopping when two
    successive values agree entrywise within tol.

    Args:
        evaluate (Callable): Maps a truncation length to (value, extra); extra is passed through.
        what (str): Label for logs and errors.
        schedule (Sequence[float]): Increasing truncation lengths. Defaults to (8, 16, 32, 64).
        tol (float): Cauchy tolerance. Defaults to 1e-7.

    Returns:
        Tuple[np.ndarray, Any]: The converged value and the extra of the last evaluation.
    """
    if len(schedule) < 2 or np.any(np.diff(schedule) <= 0):
        raise ValidationError("limit schedule needs at least two increasing lengths", code="invalid_schedule")
    previous = None
    for length in schedule:
        value, extra = evaluate(float(length))
        if previous is not None:
            change = float(np.abs(value - previous).max())
            logger.debug(f"{what}: truncation {length}, change {change:.3e}")
            if change < tol:
                return value, extra
        previous_value, previous = previous, value
    raise ConvergenceError(
        f"{what} did not settle within the truncation schedule {tuple(schedule)}",
        details={
            "schedule": [float(s) for s in schedule],
            "last_change": change,
            "last_two": [np.asarray(previous_value).tolist(), np.asarray(previous).tolist()],
        },
    )
