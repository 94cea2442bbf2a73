import logging
from dataclasses import dataclass
from functools import lru_cache
import numpy as np
from ..errors import ValidationError
from ..matrix_engine import QuadraticMatrixProblem, safe_inv, solve_quadratic_stable
from ..model import MapModel

logger = logging.getLogger(__name__)

KAPPA_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LambdaPair:
    """
    Stable solvents of F(-Lambda+) = qI and F(Lambda-) = qI, with
    Xi^{-1} = -1/2 diag(sigma^2) (Lambda+ + Lambda-).
    """

    lam_plus: np.ndarray
    lam_minus: np.ndarray
    xi: np.ndarray
    q: float

    @property
    def xi_inv(self) -> np.ndarray:
        return safe_inv(self.xi, "Xi")


def check_killing_rate(model: MapModel, q: float) -> None:
    if not q >= 0:
        raise ValidationError(f"killing rate q = {q} must be >= 0", code="invalid_rate")
    if q == 0 and abs(model.kappa()) < KAPPA_TOL:
        raise ValidationError(
            "q = 0 requires a nonzero asymptotic drift kappa = pi mu; the scale matrix is "
            "not defined for kappa = 0 and q = 0",
            code="zero_drift_unkilled",
        )


@lru_cache(maxsize=256)
def _solve_pair(q_bytes: bytes, sigma_bytes: bytes, mu_bytes: bytes, n: int, q: float):
    q_gen = np.frombuffer(q_bytes).reshape(n, n)
    sigma = np.frombuffer(sigma_bytes)
    mu = np.frombuffer(mu_bytes)
    a2 = np.diag(sigma**2 / 2)
    a0 = q_gen - q * np.eye(n)
    lam_plus = solve_quadratic_stable(QuadraticMatrixProblem(a2, -np.diag(mu), a0))
    lam_minus = solve_quadratic_stable(QuadraticMatrixProblem(a2, np.diag(mu), a0))
    xi = safe_inv(-a2 @ (lam_plus + lam_minus), "Xi^{-1} = -1/2 diag(sigma^2)(Lambda+ + Lambda-)")
    for arr in (lam_plus, lam_minus, xi):
        arr.setflags(write=False)
    return lam_plus, lam_minus, xi


def lambda_pair(model: MapModel, q: float) -> LambdaPair:
    """
    Solve the characteristic equations for Lambda+ and Lambda- and form Xi.

    Args:
        model (MapModel): The MMBM.
        q (float): Killing rate q >= 0; q = 0 needs kappa != 0.

    Returns:
        LambdaPair: The pair with its normalising matrix.
    """
    q = float(q)
    check_killing_rate(model, q)
    lam_plus, lam_minus, xi = _solve_pair(
        model.q_gen.tobytes(), model.sigma.tobytes(), model.mu.tobytes(), model.n_states, q
    )
    return LambdaPair(lam_plus, lam_minus, xi, q)


@dataclass(frozen=True, eq=False)
class LambdaRelations:
    """
    C_q = S Lambda- S^{-1} and D_q = S Lambda+ S^{-1}, S = Lambda+ + Lambda-, and the
    residuals of the four identities they satisfy.
    """

    c_q: np.ndarray
    d_q: np.ndarray
    residuals: dict

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def lambda_relations(pair: LambdaPair, model: MapModel) -> LambdaRelations:
    """
    Check diag(2 mu / sigma^2) = Lambda+ - C_q = D_q - Lambda- and
    C_q Lambda+ = D_q Lambda- = diag(2 / sigma^2)(qI - Q).

    Args:
        pair (LambdaPair): Solvents at rate q.
        model (MapModel): The model they were solved for.

    Returns:
        LambdaRelations: C_q, D_q and the residual of each identity.
    """
    s = pair.lam_plus + pair.lam_minus
    s_inv = safe_inv(s, "Lambda+ + Lambda-")
    c_q = s @ pair.lam_minus @ s_inv
    d_q = s @ pair.lam_plus @ s_inv
    drift = np.diag(2 * model.mu / model.sigma**2)
    rhs = model.two_over_var @ (pair.q * np.eye(model.n_states) - model.q_gen)
    residuals = {
        "drift_plus": float(np.abs(pair.lam_plus - c_q - drift).max()),
        "product_plus": float(np.abs(c_q @ pair.lam_plus - rhs).max()),
        "drift_minus": float(np.abs(d_q - pair.lam_minus - drift).max()),
        "product_minus": float(np.abs(d_q @ pair.lam_minus - rhs).max()),
    }
    return LambdaRelations(c_q, d_q, residuals)
