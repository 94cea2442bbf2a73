import logging
import warnings
import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from ..errors import ConditioningError

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12


def _factor(a: np.ndarray, what: str):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConditioningError(f"{what}: expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConditioningError(f"{what}: matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a, check_finite=False)
    if np.any(np.diag(lu) == 0):
        raise ConditioningError(f"{what}: matrix is singular", details={"cond": float("inf")})
    cond = np.linalg.cond(a, 1)
    if not cond < COND_LIMIT:
        raise ConditioningError(
            f"{what}: condition number {cond:.3e} exceeds {COND_LIMIT:.0e}",
            details={"cond": float(cond)},
        )
    if cond > COND_LIMIT * 1e-3:
        logger.warning(f"{what}: near-singular matrix (cond {cond:.3e})")
    return lu, piv


def safe_solve(a: np.ndarray, b: np.ndarray, what: str = "linear solve") -> np.ndarray:
    """
    Solve a X = b by LU with partial pivoting, refusing ill-conditioned systems.

    Args:
        a (np.ndarray): Square coefficient matrix.
        b (np.ndarray): Right-hand side (vector or matrix).
        what (str): Label used in the error message.

    Returns:
        np.ndarray: The solution X.
    """
    lu, piv = _factor(a, what)
    return lu_solve((lu, piv), np.asarray(b, dtype=float), check_finite=False)


def safe_inv(a: np.ndarray, what: str = "matrix inverse") -> np.ndarray:
    """
    Inverse of a small dense matrix via LU; raises ConditioningError above cond 1e12.
    """
    a = np.asarray(a, dtype=float)
    return safe_solve(a, np.eye(a.shape[0]), what)


def right_solve(b: np.ndarray, a: np.ndarray, what: str = "linear solve") -> np.ndarray:
    """X with X a = b, i.e. b a^{-1}."""
    return safe_solve(np.asarray(a).T, np.asarray(b).T, what).T
