import numpy as np
from ..errors import ConditioningError
from .linalg import safe_solve


def solve_sylvester(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """
    Solve A X - X B = C through the Kronecker system (I kron A - B^T kron I) vec(X) = vec(C),
    with column-major vec.

    Args:
        a (np.ndarray): N x N matrix A.
        b (np.ndarray): M x M matrix B.
        c (np.ndarray): N x M right-hand side.

    Returns:
        np.ndarray: The unique solution X.
    """
    a, b, c = (np.asarray(m, dtype=float) for m in (a, b, c))
    n, m = a.shape[0], b.shape[0]
    if c.shape != (n, m):
        raise ValueError(f"C has shape {c.shape}, expected ({n}, {m})")

    k = np.kron(np.eye(m), a) - np.kron(b.T, np.eye(n))
    try:
        x = safe_solve(k, c.flatten(order="F"), "Sylvester Kronecker system")
    except ConditioningError as e:
        raise ConditioningError(
            f"Sylvester equation has no unique solution (spectra of A and B overlap): {e.message}",
            details=e.details,
        )
    return x.reshape((n, m), order="F")


def sylvester_residual(a: np.ndarray, b: np.ndarray, c: np.ndarray, x: np.ndarray) -> float:
    """Frobenius norm of A X - X B - C."""
    return float(np.linalg.norm(a @ x - x @ b - c, "fro"))
