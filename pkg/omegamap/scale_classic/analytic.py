from typing import Tuple
import numpy as np
from ..errors import ValidationError


def _two_state_roots(sigma1, sigma2, q11, q22, w1, w2) -> Tuple[float, float]:
    m = sigma1**2 * (q22 + w2) + sigma2**2 * (q11 + w1)
    k = q11 * w2 + w1 * q22 + w1 * w2
    disc = m**2 - 4 * sigma1**2 * sigma2**2 * k
    if not disc > 0:
        raise ValidationError(
            f"coincident roots (discriminant {disc:.3e}); the two-state closed form needs alpha_1 != alpha_2",
            code="coincident_roots",
        )
    root = np.sqrt(disc)
    alpha1 = np.sqrt(m + root) / (sigma1 * sigma2)
    alpha2 = np.sqrt(m - root) / (sigma1 * sigma2)
    if not alpha2 > 0:
        raise ValidationError("alpha_2 = 0: the two-state closed form needs killing in some state")
    return float(alpha1), float(alpha2)


def _two_state_w(sigma1, sigma2, q11, q22, w1, w2, x, derivative: bool) -> np.ndarray:
    """
    Inverse Laplace transform of (F(s) - diag(w1, w2))^{-1} for the zero-drift generator
    [[-q11, q11], [q22, -q22]], by partial fractions in s^2.
    """
    alpha1, alpha2 = _two_state_roots(sigma1, sigma2, q11, q22, w1, w2)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    denom = (alpha1**2 - alpha2**2) * sigma1**2 * sigma2**2

    def coef(alpha):
        return np.array(
            [
                [2 * (q22 + w2) - alpha**2 * sigma2**2, 2 * q11],
                [2 * q22, 2 * (q11 + w1) - alpha**2 * sigma1**2],
            ]
        )

    pos = np.clip(xs, 0.0, None)
    if derivative:
        f2 = (np.exp(alpha2 * pos) + np.exp(-alpha2 * pos)) / denom
        f1 = (np.exp(alpha1 * pos) + np.exp(-alpha1 * pos)) / denom
    else:
        f2 = (np.exp(alpha2 * pos) - np.exp(-alpha2 * pos)) / (denom * alpha2)
        f1 = (np.exp(alpha1 * pos) - np.exp(-alpha1 * pos)) / (denom * alpha1)
    out = coef(alpha2)[None] * f2[:, None, None] - coef(alpha1)[None] * f1[:, None, None]
    out[xs < 0] = 0.0
    return out[0] if np.ndim(x) == 0 else out


def _check_positive(**params) -> None:
    bad = [f"{k} = {v} must be > 0" for k, v in params.items() if not v > 0]
    if bad:
        raise ValidationError(bad)


def analytic_w2_zero_drift(
    sigma1: float,
    sigma2: float,
    q11: float,
    q22: float,
    q: float,
    x: float | np.ndarray,
    derivative: bool = False,
) -> np.ndarray:
    """
    Closed-form W^(q) for the two-state zero-drift MMBM with Q = [[-q11, q11], [q22, -q22]].

    Args:
        sigma1 (float): Volatility in state 1.
        sigma2 (float): Volatility in state 2.
        q11 (float): Rate out of state 1.
        q22 (float): Rate out of state 2.
        q (float): Killing rate.
        x (float | np.ndarray): Level(s).
        derivative (bool): Return W^(q)' instead. Defaults to False.

    Returns:
        np.ndarray: 2 x 2 matrix or a stack of them.
    """
    _check_positive(sigma1=sigma1, sigma2=sigma2, q11=q11, q22=q22, q=q)
    return _two_state_w(sigma1, sigma2, q11, q22, q, q, x, derivative)


def constant_omega_w2(
    sigma1: float,
    sigma2: float,
    q11: float,
    q22: float,
    omega1: float,
    omega2: float,
    x: float | np.ndarray,
    derivative: bool = False,
) -> np.ndarray:
    """
    Closed-form omega-scale matrix for the two-state zero-drift MMBM with per-state constant
    killing omega = diag(omega1, omega2).
    """
    _check_positive(sigma1=sigma1, sigma2=sigma2, q11=q11, q22=q22)
    errors = [f"{k} = {v} must be >= 0" for k, v in (("omega1", omega1), ("omega2", omega2)) if not v >= 0]
    if omega1 == 0 and omega2 == 0:
        errors.append("omega1 and omega2 cannot both be 0")
    if errors:
        raise ValidationError(errors)
    return _two_state_w(sigma1, sigma2, q11, q22, omega1, omega2, x, derivative)
