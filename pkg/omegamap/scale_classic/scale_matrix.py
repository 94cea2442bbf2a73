import numpy as np
from ..matrix_engine import expm_integral, expm_stack
from ..model import MapModel
from .lambda_pair import lambda_pair


def _as_levels(x):
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return xs, np.ndim(x) == 0


def _finish(out: np.ndarray, scalar: bool) -> np.ndarray:
    return out[0] if scalar else out


def w_q(model: MapModel, q: float, x: float | np.ndarray) -> np.ndarray:
    """
    q-scale matrix W^(q)(x) = (e^{-Lambda+ x} - e^{Lambda- x}) Xi_q, zero for x < 0.

    Args:
        model (MapModel): The MMBM.
        q (float): Killing rate.
        x (float | np.ndarray): Level or 1-D array of levels.

    Returns:
        np.ndarray: N x N matrix, or a stack of shape (len(x), N, N).
    """
    pair = lambda_pair(model, q)
    xs, scalar = _as_levels(x)
    pos = np.clip(xs, 0.0, None)
    out = (expm_stack(-pair.lam_plus, pos) - expm_stack(pair.lam_minus, pos)) @ pair.xi
    out[xs < 0] = 0.0
    return _finish(out, scalar)


def w_q_prime(model: MapModel, q: float, x: float | np.ndarray) -> np.ndarray:
    """
    Derivative (-Lambda+ e^{-Lambda+ x} - Lambda- e^{Lambda- x}) Xi_q; equals diag(2 / sigma^2) at 0.
    Zero for x < 0.
    """
    pair = lambda_pair(model, q)
    xs, scalar = _as_levels(x)
    pos = np.clip(xs, 0.0, None)
    out = (
        -pair.lam_plus @ expm_stack(-pair.lam_plus, pos) - pair.lam_minus @ expm_stack(pair.lam_minus, pos)
    ) @ pair.xi
    out[xs < 0] = 0.0
    return _finish(out, scalar)


def z_q_integral(model: MapModel, q: float, x: float | np.ndarray) -> np.ndarray:
    """
    Integral of W^(q) over [0, x] (zero for x <= 0).

    Args:
        model (MapModel): The MMBM.
        q (float): Killing rate.
        x (float | np.ndarray): Upper limit(s).

    Returns:
        np.ndarray: N x N matrix, or a stack.
    """
    pair = lambda_pair(model, q)
    xs, scalar = _as_levels(x)
    pos = np.clip(xs, 0.0, None)
    out = (expm_integral(-pair.lam_plus, pos) - expm_integral(pair.lam_minus, pos)) @ pair.xi
    return _finish(out, scalar)


def z_q(model: MapModel, q: float, x: float | np.ndarray) -> np.ndarray:
    """
    Second scale matrix Z^(q)(x) = I - (int_0^x W^(q)) (Q - qI); Z^(q)(x) = I for x <= 0.
    """
    n = model.n_states
    return np.eye(n) - z_q_integral(model, q, x) @ (model.q_gen - q * np.eye(n))
