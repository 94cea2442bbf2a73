import numpy as np
from scipy.integrate import quad_vec
from ..errors import ValidationError
from ..matrix_engine import safe_inv
from ..model import MapModel, laplace_exponent
from .lambda_pair import lambda_pair
from .scale_matrix import w_q


def laplace_check(model: MapModel, q: float, s: float) -> float:
    """
    Compare the numerical Laplace transform of W^(q) at s with (F(s) - qI)^{-1}.

    Args:
        model (MapModel): The MMBM.
        q (float): Killing rate.
        s (float): Transform argument; must exceed the growth rate of W^(q).

    Returns:
        float: Max absolute entrywise difference.
    """
    pair = lambda_pair(model, q)
    growth = float(np.max(-np.linalg.eigvals(pair.lam_plus).real))
    if not s > growth:
        raise ValidationError(f"s = {s} must exceed the growth rate {growth:.6g} of W^(q)")
    # tail e^{-(s - growth) x} below e^{-60}
    upper = 60.0 / (s - growth)
    n = model.n_states

    def integrand(x):
        return (np.exp(-s * x) * w_q(model, q, x)).ravel()

    transform, _ = quad_vec(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-10)
    exact = safe_inv(laplace_exponent(model, s) - q * np.eye(n), "F(s) - qI")
    return float(np.abs(transform.reshape(n, n) - exact).max())
