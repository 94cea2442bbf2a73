from dataclasses import dataclass
from typing import Dict, Tuple
import numpy as np
from scipy.integrate import cumulative_simpson
from ..errors import ValidationError
from ..matrix_engine import expm_stack, safe_inv, solve_sylvester, sylvester_residual
from ..model import MapModel, StepOmega
from ..scale_classic import lambda_pair, w_q, w_q_prime, z_q


def _active_steps(step: StepOmega, y: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """Rate just above y, and the levels above y with the rate taken beyond each."""
    start = int(np.searchsorted(step.levels, y, side="right"))
    return float(step.rates[start]), step.levels[start:], step.rates[start + 1 :]


def _quadrature_nodes(breaks: np.ndarray, h: float) -> np.ndarray:
    pieces = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(2, 2 * int(np.ceil((b - a) / (2 * h))))
        pieces.append(np.linspace(a, b, m + 1)[1:])
    return np.concatenate(pieces)


def _step_recursion(model: MapModel, step: StepOmega, x: float | np.ndarray, y: float, h: float, base) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.diff(step.levels) <= 0):
        raise ValidationError("step omega levels must be strictly increasing")
    p_start, levels, rates = _active_steps(step, y)
    top = max(float(xs.max()), y)
    levels_in = levels[levels < top]
    breaks = np.unique(np.concatenate([[y], levels_in, xs[xs > y]]))
    nodes = _quadrature_nodes(breaks, h)

    values = base(p_start, nodes - y)
    p_prev = p_start
    for level, p_next in zip(levels_in, rates):
        i0 = int(np.searchsorted(nodes, level))
        pair = lambda_pair(model, p_next)
        u = nodes[i0:] - level
        g = pair.xi @ values[i0:]
        # W^(p)(z - u) = e^{-L+ (z - a)} e^{L+ (u - a)} Xi - e^{L- (z - a)} e^{-L- (u - a)} Xi
        up = cumulative_simpson(expm_stack(pair.lam_plus, u) @ g, x=u, axis=0, initial=0)
        down = cumulative_simpson(expm_stack(-pair.lam_minus, u) @ g, x=u, axis=0, initial=0)
        integral = expm_stack(-pair.lam_plus, u) @ up - expm_stack(pair.lam_minus, u) @ down
        values[i0:] = values[i0:] + (p_next - p_prev) * integral
        p_prev = p_next

    idx = np.searchsorted(nodes, xs)
    out = np.empty((xs.shape[0],) + values.shape[1:])
    inside = xs > y
    out[inside] = values[idx[inside]]
    out[~inside] = base(p_start, np.array([0.0]))[0]
    return out[0] if np.ndim(x) == 0 else out


def step_omega_w(
    model: MapModel,
    step: StepOmega,
    x: float | np.ndarray,
    y: float,
    h: float = 1e-3,
) -> np.ndarray:
    """
    W^(omega)(x, y) for a step omega by the level-by-level recursion
    W_{k+1}(x, y) = W_k(x, y) + (p_{k+1} - p_k) int_{x_{k+1}}^x W^(p_{k+1})(x - z) W_k(z, y) dz,
    starting from W_0 = W^(p_0)(x - y). Integrals use composite Simpson on nodes that
    include every level and every requested x.

    Args:
        model (MapModel): The MMBM.
        step (StepOmega): Step killing intensity.
        x (float | np.ndarray): First argument(s).
        y (float): Second argument.
        h (float): Target quadrature step. Defaults to 1e-3.

    Returns:
        np.ndarray: N x N matrix, or a stack for an array of x.
    """
    return _step_recursion(model, step, x, y, h, lambda p, t: w_q(model, p, t))


def step_omega_z(
    model: MapModel,
    step: StepOmega,
    x: float | np.ndarray,
    y: float,
    h: float = 1e-3,
) -> np.ndarray:
    """Second omega-scale matrix for a step omega; the same recursion started from Z^(p_0)."""
    return _step_recursion(model, step, x, y, h, lambda p, t: z_q(model, p, t))


def closed_step_omega_w(
    model: MapModel,
    p0: float,
    p1: float,
    x1: float,
    x: float | np.ndarray,
    y: float,
) -> np.ndarray:
    """
    Closed form of W^(omega)(x, y) for omega = p0 below x1 and p1 above:
    W^(p0)(x - y) for x <= x1, and for x > x1, with t = x - x1 and S = Lambda+_{p1} + Lambda-_{p1},
    (e^{-Lambda+ t} S^{-1} Lambda- + e^{Lambda- t} S^{-1} Lambda+) W^(p0)(x1 - y)
    + W^(p1)(t) diag(sigma^2 / 2) W^(p0)'(x1 - y).

    Args:
        model (MapModel): The MMBM.
        p0 (float): Rate below x1.
        p1 (float): Rate above x1.
        x1 (float): Level of the step.
        x (float | np.ndarray): First argument(s).
        y (float): Second argument.

    Returns:
        np.ndarray: N x N matrix, or a stack for an array of x.
    """
    if p0 == p1:
        raise ValidationError("closed step form needs p0 != p1", code="degenerate_step")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if y >= x1:
        out = w_q(model, p1, xs - y)
        return out[0] if np.ndim(x) == 0 else out

    out = w_q(model, p0, xs - y)
    above = xs > x1
    if np.any(above):
        pair = lambda_pair(model, p1)
        s_inv = safe_inv(pair.lam_plus + pair.lam_minus, "Lambda+ + Lambda-")
        t = xs[above] - x1
        u = expm_stack(-pair.lam_plus, t) @ (s_inv @ pair.lam_minus) + expm_stack(pair.lam_minus, t) @ (
            s_inv @ pair.lam_plus
        )
        seam = w_q(model, p0, x1 - y)
        slope = model.var_half @ w_q_prime(model, p0, x1 - y)
        out[above] = u @ seam + w_q(model, p1, t) @ slope
    return out[0] if np.ndim(x) == 0 else out


@dataclass(frozen=True, eq=False)
class StepConstants:
    """
    Constants of the single-step closed form, with residuals of their Sylvester equations and of
    the identities (p1 - p0)(E - C) = I and (p1 - p0)(F - D) = I.
    """

    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    f: np.ndarray
    sylvester_residuals: Dict[str, float]
    sylvester_gap: float
    identity_residuals: Dict[str, float]


def step_constants(model: MapModel, p0: float, p1: float) -> StepConstants:
    """
    C, D, E, F solving
    Lambda+_1 C - C Lambda+_0 = Xi_1,   Lambda+_1 D + D Lambda-_0 = Xi_1,
    -Lambda-_1 E - E Lambda+_0 = Xi_1,  -Lambda-_1 F + F Lambda-_0 = Xi_1,
    with subscripts 0, 1 for the rates p0, p1. The explicit forms are returned; the Kronecker
    solutions are used to check them.

    Args:
        model (MapModel): The MMBM.
        p0 (float): Rate below the step.
        p1 (float): Rate above the step.

    Returns:
        StepConstants: The constants and their checks.
    """
    if p0 == p1:
        raise ValidationError("step constants need p0 != p1", code="degenerate_step")
    low, high = lambda_pair(model, p0), lambda_pair(model, p1)
    dp = p1 - p0
    s_inv = safe_inv(high.lam_plus + high.lam_minus, "Lambda+ + Lambda-")
    consts = {
        "c": -s_inv @ (low.lam_plus + high.lam_minus) / dp,
        "d": -s_inv @ (high.lam_minus - low.lam_minus) / dp,
        "e": s_inv @ (high.lam_plus - low.lam_plus) / dp,
        "f": s_inv @ (high.lam_plus + low.lam_minus) / dp,
    }
    equations = {
        "c": (high.lam_plus, low.lam_plus),
        "d": (high.lam_plus, -low.lam_minus),
        "e": (-high.lam_minus, low.lam_plus),
        "f": (-high.lam_minus, -low.lam_minus),
    }
    residuals, gap = {}, 0.0
    for name, (a, b) in equations.items():
        residuals[name] = sylvester_residual(a, b, high.xi, consts[name])
        gap = max(gap, float(np.abs(solve_sylvester(a, b, high.xi) - consts[name]).max()))

    eye = np.eye(model.n_states)
    identities = {
        "e_minus_c": float(np.abs(dp * (consts["e"] - consts["c"]) - eye).max()),
        "f_minus_d": float(np.abs(dp * (consts["f"] - consts["d"]) - eye).max()),
    }
    return StepConstants(**consts, sylvester_residuals=residuals, sylvester_gap=gap, identity_residuals=identities)
