import logging
from typing import Callable
import numpy as np
from ..errors import ConvergenceError, ValidationError
from ..model import MapModel, MatrixGrid

logger = logging.getLogger(__name__)

# five-stage, fourth-order low-storage Runge-Kutta coefficients
_RK4A = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
]
_RK4B = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
]
_RK4C = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
]


class RK4Stepper:
    """Low-storage fourth-order Runge-Kutta step for y' = rhs(t, y)."""

    def __call__(self, y: np.ndarray, t: float, dt: float, rhs: Callable[[float, np.ndarray], np.ndarray]) -> np.ndarray:
        residual = np.zeros_like(y)
        for a, b, c in zip(_RK4A, _RK4B, _RK4C):
            residual = a * residual + dt * rhs(t + c * dt, y)
            y = y + b * residual
        return y


def _integrate(
    model: MapModel, segments: list[tuple[float, float, Callable[[float], float]]], h: float
) -> np.ndarray:
    n = model.n_states
    two_over_var = model.two_over_var
    drift = np.diag(model.mu)
    gen = model.q_gen

    y = np.concatenate([np.zeros((n, n)), two_over_var])
    out = [y[:n].copy()]
    stepper = RK4Stepper()
    for a, b, rate in segments:

        def rhs(z, state, rate=rate):
            g, gp = state[:n], state[n:]
            return np.concatenate([gp, two_over_var @ (rate(z) * g - drift @ gp - gen @ g)])

        for k in range(int(round((b - a) / h))):
            y = stepper(y, a + k * h, h, rhs)
            out.append(y[:n].copy())
    return np.array(out)


def omega_model_ode_g(
    model: MapModel,
    gamma0: float,
    gamma1: float,
    d: float,
    delta: float,
    z_max: float,
    h: float = 1e-3,
    tol: float = 1e-8,
    extrapolate: bool = True,
) -> MatrixGrid:
    """
    G(z) = W^(omega + delta)(z - d, -d) for the affine band omega(x) = gamma0 + gamma1 (x + d)
    on [-d, 0], by integrating
    (sigma^2 / 2) G'' + mu G' + Q G = (omega_1(z) + delta) G,  G(0) = 0,  G'(0) = diag(2 / sigma^2),
    with omega_1(z) = gamma0 + gamma1 z on [0, d] and 0 beyond. The integration runs piecewise on
    [0, d] and [d, z_max] at steps h and h/2; their difference estimates the error.

    Args:
        model (MapModel): The MMBM.
        gamma0 (float): Band intercept.
        gamma1 (float): Band slope.
        d (float): Band width; d / h must be an integer.
        delta (float): Constant discount.
        z_max (float): Right end; (z_max - d) / h must be an integer.
        h (float): Step. Defaults to 1e-3.
        tol (float): Largest accepted error estimate, relative to 1 + max |G|. Defaults to 1e-8.
        extrapolate (bool): Return the Richardson combination of the two runs. Defaults to True.

    Returns:
        MatrixGrid: G on the nodes 0, h, ..., z_max.
    """
    errors = []
    if not h > 0:
        errors.append(f"step h = {h} must be > 0")
    if not 0 <= d <= z_max:
        errors.append(f"need 0 <= d <= z_max, got d = {d}, z_max = {z_max}")
    if not errors:
        for name, length in (("d", d), ("z_max - d", z_max - d)):
            ratio = length / h
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                errors.append(f"{name} = {length} is not a multiple of h = {h}")
    if errors:
        raise ValidationError(errors)

    # one segment per smooth piece of omega so no step straddles a break
    segments = []
    if d > 0:
        segments.append((0.0, float(d), lambda z: gamma0 + gamma1 * z + delta))
    if z_max > d:
        segments.append((float(d), float(z_max), lambda z: delta))
    coarse = _integrate(model, segments, h)
    fine = _integrate(model, segments, h / 2)[::2]

    estimate = float(np.abs(fine - coarse).max()) / 15.0
    scale = 1.0 + float(np.abs(fine).max())
    logger.debug(f"omega-model ODE: error estimate {estimate:.3e} (scale {scale:.3e}) at h = {h}")
    if not np.isfinite(estimate) or estimate > tol * scale:
        raise ConvergenceError(
            f"ODE error estimate {estimate:.3e} exceeds tolerance {tol:.1e} at h = {h}",
            details={"estimate": estimate, "h": h},
        )
    values = fine + (fine - coarse) / 15.0 if extrapolate else fine
    return MatrixGrid(0.0, h, values)
