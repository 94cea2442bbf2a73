import logging
from dataclasses import dataclass
from typing import Callable, Literal
import numpy as np
from ..errors import ValidationError
from ..matrix_engine import expm_stack
from ..model import MapModel, MatrixGrid, OmegaFn, uniform_nodes
from ..scale_classic import check_killing_rate, lambda_pair, w_q, w_q_prime, z_q, z_q_integral
from ..scale_classic.lambda_pair import KAPPA_TOL
from .volterra import SolverMode, VolterraProblem, trapezoid_convolution, volterra_solve

logger = logging.getLogger(__name__)

ZInhomogeneity = Literal["generator", "identity"]
DEFAULT_STEP = 1e-3
FALLBACK_SHIFT = 0.1


@dataclass(frozen=True, eq=False)
class OmegaScaleSet:
    """
    The omega-scale matrices W(., y), Z(., y) and W'(., y) for the killing omega + delta,
    on a shared grid starting at y.
    """

    w_omega: MatrixGrid
    z_omega: MatrixGrid
    w_omega_prime: MatrixGrid
    y: float
    delta: float

    @property
    def xs(self) -> np.ndarray:
        return self.w_omega.xs


def kernel_shift(model: MapModel, om: OmegaFn, delta: float = 0.0) -> float:
    """
    Rate s of the kernel W^(s) used for the omega-scale solves. With s = inf(omega) + delta the
    weight omega + delta - s is nonnegative; s = 0 needs kappa != 0.

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        delta (float): Discount added to omega. Defaults to 0.

    Returns:
        float: The shift s.
    """
    s = om.lower_bound + delta
    if s > 0:
        return float(s)
    if abs(model.kappa()) >= KAPPA_TOL:
        return 0.0
    logger.debug(f"kappa = 0 and omega + delta vanishes somewhere; using kernel shift {FALLBACK_SHIFT}")
    return FALLBACK_SHIFT


def _node_count(y: float, x_max: float, h: float) -> int:
    if x_max < y:
        raise ValidationError(f"x_max = {x_max} is below the left endpoint y = {y}")
    return len(uniform_nodes(y, x_max, h))


def _extrapolated(solve: Callable[[int, float], MatrixGrid], n: int, h: float, extrapolate: bool) -> MatrixGrid:
    coarse = solve(n, h)
    if not extrapolate:
        return coarse
    fine = solve(2 * n - 1, h / 2)
    return MatrixGrid(coarse.x0, h, (4 * fine.values[::2] - coarse.values) / 3)


def _omega_solve(
    model: MapModel,
    om: OmegaFn,
    y: float,
    x_max: float,
    h: float,
    delta: float,
    shift: float | None,
    mode: SolverMode,
    extrapolate: bool,
    inhomogeneity: Callable[[float, np.ndarray], np.ndarray],
) -> MatrixGrid:
    if om.n_states != model.n_states:
        raise ValidationError(f"omega describes {om.n_states} states, model has {model.n_states}")
    if shift is None:
        shift = kernel_shift(model, om, delta)
    check_killing_rate(model, shift)

    def solve(n: int, step: float) -> MatrixGrid:
        t = step * np.arange(n)
        kernel = MatrixGrid(0.0, step, w_q(model, shift, t))
        problem = VolterraProblem(kernel, om, MatrixGrid(y, step, inhomogeneity(shift, t)), offset=delta - shift)
        return volterra_solve(problem, mode)

    n = _node_count(y, x_max, h)
    logger.debug(f"omega-scale solve on [{y}, {y + h * (n - 1)}]: {n} nodes, kernel shift {shift}")
    return _extrapolated(solve, n, h, extrapolate)


def omega_w(
    model: MapModel,
    om: OmegaFn,
    y: float,
    x_max: float,
    h: float = DEFAULT_STEP,
    delta: float = 0.0,
    shift: float | None = None,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> MatrixGrid:
    """
    First omega-scale matrix W^(omega + delta)(x, y) for x on a grid over [y, x_max].

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        y (float): Second argument (left endpoint).
        x_max (float): Right end of the grid.
        h (float): Grid step. Defaults to 1e-3.
        delta (float): Constant discount added to omega. Defaults to 0.
        shift (float, optional): Kernel rate s; any admissible s gives the same matrix.
            Defaults to `kernel_shift`.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the solves at h and h/2. Defaults to False.

    Returns:
        MatrixGrid: W(x, y) with x0 = y.
    """
    return _omega_solve(
        model, om, y, x_max, h, delta, shift, mode, extrapolate,
        lambda s, t: w_q(model, s, t),
    )


def omega_z(
    model: MapModel,
    om: OmegaFn,
    y: float,
    x_max: float,
    h: float = DEFAULT_STEP,
    delta: float = 0.0,
    shift: float | None = None,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    inhomogeneity: ZInhomogeneity = "generator",
) -> MatrixGrid:
    """
    Second omega-scale matrix Z^(omega + delta)(x, y) on [y, x_max].

    The default "generator" form is driven by Z(x) = I - int_0^x W Q, which reproduces Z^(q) for
    omega == q; "identity" uses the constant driving term I. Both have the same row sums.
    Remaining arguments are as in `omega_w`.
    """
    n = model.n_states
    if inhomogeneity == "generator":
        drive = lambda s, t: z_q(model, s, t)
    elif inhomogeneity == "identity":
        drive = lambda s, t: np.eye(n) + s * z_q_integral(model, s, t)
    else:
        raise ValidationError(
            f"Invalid inhomogeneity: {inhomogeneity}. Valid values are: generator, identity"
        )
    return _omega_solve(model, om, y, x_max, h, delta, shift, mode, extrapolate, drive)


def _derivative_from(w_grid: MatrixGrid, model: MapModel, om: OmegaFn, delta: float, shift: float) -> np.ndarray:
    n, h = len(w_grid), w_grid.h
    t = h * np.arange(n)
    kernel_prime = w_q_prime(model, shift, t)
    p = (om.sample(w_grid.xs) + delta - shift)[:, :, None] * w_grid.values
    # W^(s)(0) = 0, so the boundary term of the differentiated equation drops out
    return kernel_prime + trapezoid_convolution(kernel_prime, p, h)


def omega_w_prime(
    scale_set: OmegaScaleSet | MatrixGrid,
    model: MapModel,
    om: OmegaFn,
    delta: float = 0.0,
    shift: float | None = None,
) -> MatrixGrid:
    """
    Derivative in x of W^(omega + delta)(x, y), by differentiating the integral equation:
    W'(x, y) = W^(s)'(x - y) + int_y^x W^(s)'(x - z)(omega(z) + delta - s) W(z, y) dz.

    Args:
        scale_set (OmegaScaleSet | MatrixGrid): A set, or the W grid on its own.
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        delta (float): Discount the grid was computed with. Defaults to 0.
        shift (float, optional): Kernel rate. Defaults to `kernel_shift`.

    Returns:
        MatrixGrid: W' on the same grid.
    """
    w_grid = scale_set.w_omega if isinstance(scale_set, OmegaScaleSet) else scale_set
    if shift is None:
        shift = kernel_shift(model, om, delta)
    return MatrixGrid(w_grid.x0, w_grid.h, _derivative_from(w_grid, model, om, delta, shift))


def omega_scale_set(
    model: MapModel,
    om: OmegaFn,
    y: float,
    x_max: float,
    h: float = DEFAULT_STEP,
    delta: float = 0.0,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> OmegaScaleSet:
    """
    W, Z and W' of omega + delta on one grid over [y, x_max]. With `extrapolate` every member
    is Richardson-combined from the solves at h and h/2.
    """
    shift = kernel_shift(model, om, delta)
    n = _node_count(y, x_max, h)

    def solve(count: int, step: float):
        x_end = y + step * (count - 1)
        w = omega_w(model, om, y, x_end, step, delta, shift, mode)
        z = omega_z(model, om, y, x_end, step, delta, shift, mode)
        wp = MatrixGrid(y, step, _derivative_from(w, model, om, delta, shift))
        return w, z, wp

    coarse = solve(n, h)
    if extrapolate:
        fine = solve(2 * n - 1, h / 2)
        coarse = tuple(MatrixGrid(y, h, (4 * f.values[::2] - c.values) / 3) for c, f in zip(coarse, fine))
    w, z, wp = coarse
    return OmegaScaleSet(w, z, wp, float(y), float(delta))


def omega_h(
    model: MapModel,
    om: OmegaFn,
    beta: float,
    x_max: float,
    h: float = DEFAULT_STEP,
    level: float = 0.0,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
) -> MatrixGrid:
    """
    H^(omega)(x) = e^{-Lambda^beta (x - level)} + int_level^x W^(beta)(x - z)(omega(z) - beta) H(z) dz
    on [level, x_max], for omega == beta on (-inf, level]. Below `level`, H is the exponential
    alone, so H(x) H(c)^{-1} is the upward first-passage transform.

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity, constant beta below `level`.
        beta (float): The constant value of omega below `level`.
        x_max (float): Right end of the grid.
        h (float): Grid step. Defaults to 1e-3.
        level (float): Level below which omega == beta. Defaults to 0.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the solves at h and h/2. Defaults to False.

    Returns:
        MatrixGrid: H on [level, x_max].
    """
    below = om.constant_below(level)
    if below is None or not np.isclose(below, beta, rtol=1e-12, atol=1e-15):
        raise ValidationError(
            f"omega must equal beta = {beta} in every state on (-inf, {level}]",
            code="omega_not_constant_below",
        )
    check_killing_rate(model, beta)
    lam = lambda_pair(model, beta).lam_plus

    return _omega_solve(
        model, om, level, x_max, h, 0.0, beta, mode, extrapolate,
        lambda s, t: expm_stack(-lam, t),
    )


def h_below(model: MapModel, beta: float, x: float, level: float = 0.0) -> np.ndarray:
    """H^(omega)(x) for x <= level, where it reduces to e^{-Lambda^beta (x - level)}."""
    return expm_stack(-lambda_pair(model, beta).lam_plus, np.array([x - level]))[0]
