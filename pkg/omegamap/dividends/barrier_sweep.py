from dataclasses import dataclass
import numpy as np
import pandas as pd
from ..errors import ValidationError
from ..model import MapModel, OmegaFn
from ..scale_omega import SolverMode, omega_scale_set
from ..scale_omega.omega_scale import DEFAULT_STEP
from .barrier_value import validate_query, values_from_set


@dataclass(frozen=True, eq=False)
class SweepResult:
    """
    Row sums of v_c(x) per barrier (columns `state_1`, ..., `state_N`) and, per starting state,
    the sampled barrier with the largest value.
    """

    table: pd.DataFrame
    best_barrier: pd.Series


def barrier_sweep(
    model: MapModel,
    om: OmegaFn,
    d: float,
    delta: float,
    x: float,
    c_grid: np.ndarray,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> SweepResult:
    """
    Evaluate the barrier-strategy value at x for every barrier in c_grid from one scale-set solve
    over [-d, max(c_grid)].

    Args:
        model (MapModel): The MMBM surplus.
        om (OmegaFn): Bankruptcy intensity.
        d (float): Depth of the ruin floor.
        delta (float): Discount rate.
        x (float): Initial surplus.
        c_grid (np.ndarray): Positive ascending barriers.
        h (float): Grid step. Defaults to 1e-3.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.

    Returns:
        SweepResult: Table of values and the best sampled barrier per state.
    """
    c_grid = np.atleast_1d(np.asarray(c_grid, dtype=float))
    errors = validate_query(float(c_grid.min()) if c_grid.size else 0.0, d, delta, [x])
    if c_grid.size == 0 or np.any(np.diff(c_grid) <= 0):
        errors.append("c_grid must be non-empty and strictly ascending")
    if errors:
        raise ValidationError(errors, code="invalid_sweep")

    scale_set = omega_scale_set(model, om, -d, float(c_grid[-1]), h, delta, mode, extrapolate)
    values = np.stack([values_from_set(scale_set, c, np.array([x]))[0].sum(axis=1) for c in c_grid])

    states = [f"state_{i + 1}" for i in range(model.n_states)]
    table = pd.DataFrame(values, columns=states)
    table.insert(0, "c", c_grid)
    best = pd.Series({state: float(c_grid[np.argmax(table[state].to_numpy())]) for state in states}, name="c")
    return SweepResult(table, best)
