from dataclasses import dataclass
from typing import Tuple
import numpy as np
from ..matrix_engine import right_solve
from ..model import MapModel, MatrixGrid, OmegaFn
from ..scale_omega import SolverMode, omega_w, omega_z
from ..scale_omega.omega_scale import DEFAULT_STEP
from .common import check_ordered, value_at


@dataclass(frozen=True, eq=False)
class ExitResult:
    """
    Two-sided exit matrices from x for the window [d, c]: `up` holds
    E_x[e^{-int omega}, tau_c+ < tau_d-, J at tau_c+ | J_0] and `down` the same for tau_d-.
    """

    up: np.ndarray
    down: np.ndarray
    x: float
    c: float
    d: float

    def row_sums(self) -> np.ndarray:
        return (self.up + self.down).sum(axis=1)


def exit_matrices(w_grid: MatrixGrid, z_grid: MatrixGrid, x: float, c: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    A(x, c) = W(x, d) W(c, d)^{-1} and B(x, c) = Z(x, d) - A(x, c) Z(c, d) from grids with origin d.
    """
    up = right_solve(value_at(w_grid, x), value_at(w_grid, c), f"W(c = {c}, d)")
    down = value_at(z_grid, x) - up @ value_at(z_grid, c)
    return up, down


def two_sided_exit(
    model: MapModel,
    om: OmegaFn,
    d: float,
    x: float,
    c: float,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> ExitResult:
    """
    Omega-killed two-sided exit matrices for d <= x <= c.

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        d (float): Lower barrier.
        x (float): Starting level.
        c (float): Upper barrier, c > d.
        h (float): Grid step. Defaults to 1e-3.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.

    Returns:
        ExitResult: The matrices A (up) and B (down).
    """
    check_ordered(d, x, c)
    w_grid = omega_w(model, om, d, c, h, mode=mode, extrapolate=extrapolate)
    z_grid = omega_z(model, om, d, c, h, mode=mode, extrapolate=extrapolate)
    up, down = exit_matrices(w_grid, z_grid, x, c)
    return ExitResult(up, down, float(x), float(c), float(d))
