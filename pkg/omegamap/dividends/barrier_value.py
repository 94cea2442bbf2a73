from dataclasses import dataclass
from typing import List
import numpy as np
from ..errors import ValidationError
from ..matrix_engine import right_solve
from ..model import MapModel, OmegaFn
from ..scale_omega import OmegaScaleSet, SolverMode, omega_scale_set
from ..scale_omega.omega_scale import DEFAULT_STEP


@dataclass(frozen=True, eq=False)
class DividendQuery:
    """
    Barrier strategy at c, paid until omega ruin: killing at rate omega + delta above the floor
    -d and ruin on crossing below -d.

    Args:
        model (MapModel): The MMBM surplus.
        om (OmegaFn): Bankruptcy intensity.
        c (float): Dividend barrier, c > 0.
        d (float): Depth of the ruin floor, d >= 0.
        delta (float): Discount rate, delta > 0.
        x (float): Initial surplus, x > -d.
    """

    model: MapModel
    om: OmegaFn
    c: float
    d: float
    delta: float
    x: float

    def __post_init__(self):
        errors = validate_query(self.c, self.d, self.delta, [self.x])
        if errors:
            raise ValidationError(errors, code="invalid_dividend_query")


def validate_query(c: float, d: float, delta: float, xs) -> List[str]:
    errors = []
    if not c > 0:
        errors.append(f"barrier c = {c} must be > 0")
    if not d >= 0:
        errors.append(f"floor depth d = {d} must be >= 0")
    if not delta > 0:
        errors.append(f"discount delta = {delta} must be > 0")
    low = [x for x in xs if not x > -d]
    if low:
        errors.append(f"initial surplus must exceed the floor -d = {-d}, got {low[0]}")
    return errors


def values_from_set(scale_set: OmegaScaleSet, c: float, xs: np.ndarray) -> np.ndarray:
    """
    v_c(x) = W(x, -d) W'(c, -d)^{-1} for x <= c and (x - c) I + W(c, -d) W'(c, -d)^{-1} above c.

    Args:
        scale_set (OmegaScaleSet): Scale set with origin -d covering [-d, c].
        c (float): Barrier.
        xs (np.ndarray): Initial surpluses.

    Returns:
        np.ndarray: Shape (len(xs), N, N).
    """
    w, wp = scale_set.w_omega, scale_set.w_omega_prime
    wp_c = wp.at(c)
    out = np.empty((len(xs), w.n_states, w.n_states))
    eye = np.eye(w.n_states)
    for i, x in enumerate(xs):
        if x <= c:
            out[i] = right_solve(w.at(x), wp_c, f"W'(c = {c}, -d)")
        else:
            out[i] = (x - c) * eye + right_solve(w.at(c), wp_c, f"W'(c = {c}, -d)")
    return out


def dividend_value_grid(
    query: DividendQuery,
    xs: np.ndarray,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> np.ndarray:
    """
    Value matrices of the barrier strategy of `query` at every initial surplus in xs, from one
    scale-set solve (query.x is ignored).

    Returns:
        np.ndarray: Shape (len(xs), N, N).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    errors = validate_query(query.c, query.d, query.delta, xs)
    if errors:
        raise ValidationError(errors, code="invalid_dividend_query")
    scale_set = omega_scale_set(
        query.model, query.om, -query.d, query.c, h, query.delta, mode, extrapolate
    )
    return values_from_set(scale_set, query.c, xs)


def dividend_value(
    query: DividendQuery,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> np.ndarray:
    """
    Expected discounted dividends paid before omega ruin under the barrier strategy, as the matrix
    E_x[int_0^{tau} e^{-delta t} dL_t, J at ruin | J_0]. The lump x - c paid at time 0 for x > c
    is added on the diagonal.

    Args:
        query (DividendQuery): Model, omega, barrier, floor, discount and start.
        h (float): Grid step. Defaults to 1e-3.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.

    Returns:
        np.ndarray: N x N value matrix.
    """
    return dividend_value_grid(query, np.array([query.x]), h, mode, extrapolate)[0]
