import numpy as np
import scipy.linalg
from ..errors import NumericalError


def expm(m: np.ndarray, t: float = 1.0) -> np.ndarray:
    """
    Matrix exponential e^{M t} by scaling and squaring with Pade approximation.

    Args:
        m (np.ndarray): Square matrix.
        t (float): Scalar multiplier. Defaults to 1.0.

    Returns:
        np.ndarray: e^{M t}.
    """
    mt = np.asarray(m, dtype=float) * t
    if not np.all(np.isfinite(mt)):
        raise NumericalError("expm argument has non-finite entries")
    out = scipy.linalg.expm(mt)
    if not np.all(np.isfinite(out)):
        raise NumericalError(f"expm overflow (||Mt|| = {np.linalg.norm(mt, 1):.3e})", code="overflow")
    return out


def expm_stack(m: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """
    e^{M t} for every t in a 1-D array, shape (len(ts), N, N).
    """
    ts = np.asarray(ts, dtype=float)
    if ts.size == 0:
        n = np.shape(m)[0]
        return np.zeros((0, n, n))
    # scipy.linalg.expm broadcasts over a leading stack axis
    return expm(np.asarray(m, dtype=float)[None, :, :] * ts[:, None, None])


def expm_integral(m: np.ndarray, x: float | np.ndarray) -> np.ndarray:
    """
    Integral of e^{M t} over [0, x], read off the block exponential of [[M, I], [0, 0]]
    (valid also when M is singular). An array of x gives a stack.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = m
    block[:n, n:] = np.eye(n)
    if np.ndim(x) == 0:
        return expm(block, x)[:n, n:]
    return expm_stack(block, x)[:, :n, n:]
