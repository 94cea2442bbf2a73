from typing import Sequence, Tuple
import numpy as np
from ..errors import ConditioningError, ValidationError
from ..matrix_engine import right_solve, safe_solve
from ..model import MapModel, MatrixGrid, OmegaFn
from ..scale_omega import SolverMode, h_below, omega_h, omega_w, omega_z
from ..scale_omega.omega_scale import DEFAULT_STEP
from .common import LIMIT_SCHEDULE, LIMIT_TOL, converge_limit, value_at


def h_value(model: MapModel, beta: float, h_grid: MatrixGrid, t: float, level: float) -> np.ndarray:
    """H(t), from the grid above `level` and from the exponential below it."""
    if t <= level:
        return h_below(model, beta, t, level)
    return h_grid.at(t)


def one_sided_up(
    model: MapModel,
    om: OmegaFn,
    beta: float,
    x: float,
    c: float,
    level: float = 0.0,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> np.ndarray:
    """
    E_x[e^{-int_0^{tau_c+} omega}, tau_c+ < inf, J at tau_c+ | J_0] = H(x) H(c)^{-1}, for omega
    equal to beta in every state on (-inf, level].

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        beta (float): Value of omega below `level`.
        x (float): Starting level.
        c (float): Upper barrier, x <= c.
        level (float): Level below which omega == beta. Defaults to 0.
        h (float): Grid step. Defaults to 1e-3.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.

    Returns:
        np.ndarray: N x N first-passage matrix.
    """
    if x > c:
        raise ValidationError(f"need x <= c, got x = {x}, c = {c}", code="invalid_levels")
    h_grid = omega_h(model, om, beta, max(c, level), h, level, mode, extrapolate)
    return right_solve(
        h_value(model, beta, h_grid, x, level),
        h_value(model, beta, h_grid, c, level),
        f"H(c = {c})",
    )


def down_limit(
    model: MapModel,
    om: OmegaFn,
    d: float = 0.0,
    reach: float | None = None,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    schedule: Sequence[float] = LIMIT_SCHEDULE,
    tol: float = LIMIT_TOL,
) -> Tuple[np.ndarray, MatrixGrid, MatrixGrid]:
    """
    C = lim_{c -> inf} W(c, d)^{-1} Z(c, d), with the W and Z grids of the accepted truncation.

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity; must not vanish identically.
        d (float): Lower barrier. Defaults to 0.
        reach (float, optional): Level the returned grids must cover. Defaults to d.
        h (float): Grid step. Defaults to 1e-3.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.
        schedule (Sequence[float]): Truncation lengths above d. Defaults to (8, 16, 32, 64).
        tol (float): Cauchy tolerance. Defaults to 1e-7.

    Returns:
        Tuple[np.ndarray, MatrixGrid, MatrixGrid]: C, and the W and Z grids.
    """
    if not om.bound_lambda > 0:
        raise ValidationError(
            "one-sided downward exit needs omega > 0 somewhere (lambda > 0)", code="zero_omega"
        )
    reach = d if reach is None else reach

    def evaluate(length: float):
        c = d + length
        top = max(c, reach)
        w_grid = omega_w(model, om, d, top, h, mode=mode, extrapolate=extrapolate)
        z_grid = omega_z(model, om, d, top, h, mode=mode, extrapolate=extrapolate)
        try:
            limit = safe_solve(w_grid.at(c), z_grid.at(c), f"W(c = {c}, d)")
        except ConditioningError as e:
            # W(c, d) grows at several exponential rates, so long truncations lose rank
            raise ConditioningError(
                f"{e.message}; the limit did not settle before truncation {length}, "
                "use a shorter schedule with a looser tol",
                details={**e.details, "truncation": length, "schedule": [float(s) for s in schedule]},
            ) from e
        return limit, (w_grid, z_grid)

    limit, (w_grid, z_grid) = converge_limit(evaluate, "W(c)^-1 Z(c)", schedule, tol)
    return limit, w_grid, z_grid


def one_sided_down(
    model: MapModel,
    om: OmegaFn,
    x: float,
    d: float = 0.0,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    schedule: Sequence[float] = LIMIT_SCHEDULE,
    tol: float = LIMIT_TOL,
) -> np.ndarray:
    """
    E_x[e^{-int_0^{tau_d-} omega}, tau_d- < inf, J at tau_d- | J_0] = Z(x, d) - W(x, d) C for x >= d,
    with C the limit of W(c, d)^{-1} Z(c, d). Remaining arguments are as in `down_limit`.
    """
    if x < d:
        raise ValidationError(f"need x >= d, got x = {x}, d = {d}", code="invalid_levels")
    limit, w_grid, z_grid = down_limit(model, om, d, x, h, mode, extrapolate, schedule, tol)
    return value_at(z_grid, x) - value_at(w_grid, x) @ limit


def two_sided_down_via_one_sided(
    model: MapModel,
    om: OmegaFn,
    x: float,
    c: float,
    d: float = 0.0,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    schedule: Sequence[float] = LIMIT_SCHEDULE,
    tol: float = LIMIT_TOL,
) -> np.ndarray:
    """
    B(x, c) written through the one-sided matrices: B(x) - A(x, c) B(c). It must agree with the
    two-sided formula.
    """
    if not d <= x <= c:
        raise ValidationError(f"need d <= x <= c, got {d}, {x}, {c}", code="invalid_levels")
    limit, w_grid, z_grid = down_limit(model, om, d, c, h, mode, extrapolate, schedule, tol)
    w_x, w_c = value_at(w_grid, x), value_at(w_grid, c)
    b_x = value_at(z_grid, x) - w_x @ limit
    b_c = value_at(z_grid, c) - w_c @ limit
    return b_x - right_solve(w_x, w_c, f"W(c = {c}, d)") @ b_c
