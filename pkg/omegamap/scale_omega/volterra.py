import logging
from dataclasses import dataclass
from typing import Literal
import numpy as np
from scipy.integrate import simpson
from scipy.signal import fftconvolve
from ..errors import ConvergenceError, ValidationError
from ..matrix_engine import safe_solve
from ..model import MatrixGrid, OmegaFn

logger = logging.getLogger(__name__)

SolverMode = Literal["forward", "picard"]
PICARD_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class VolterraProblem:
    """
    H(x) = h(x) + int_y^x K(x - z) (omega(z) + offset) H(z) dz on the grid of h.

    Args:
        kernel (MatrixGrid): K sampled at 0, h, 2h, ... (at least as many nodes as h).
        weight (OmegaFn): Diagonal weight omega.
        inhomogeneity (MatrixGrid): h sampled on [y, x_max]; its origin is y.
        offset (float): Constant added to the weight (e.g. delta - shift). Defaults to 0.
    """

    kernel: MatrixGrid
    weight: OmegaFn
    inhomogeneity: MatrixGrid
    offset: float = 0.0

    def __post_init__(self):
        errors = []
        if not np.isclose(self.kernel.h, self.inhomogeneity.h, rtol=1e-12, atol=0):
            errors.append(f"kernel step {self.kernel.h} differs from grid step {self.inhomogeneity.h}")
        if self.kernel.x0 != 0.0:
            errors.append(f"kernel grid must start at 0, got {self.kernel.x0}")
        if len(self.kernel) < len(self.inhomogeneity):
            errors.append(f"kernel has {len(self.kernel)} nodes, need {len(self.inhomogeneity)}")
        if self.kernel.n_states != self.inhomogeneity.n_states:
            errors.append("kernel and inhomogeneity disagree on N")
        if errors:
            raise ValidationError(errors, code="invalid_volterra_problem")

    @property
    def origin(self) -> float:
        return self.inhomogeneity.x0

    @property
    def h(self) -> float:
        return self.inhomogeneity.h

    def weights(self) -> np.ndarray:
        """Diagonal weights at the solution nodes, shape (n, N)."""
        return self.weight.sample(self.inhomogeneity.xs) + self.offset


def trapezoid_convolution(kernel: np.ndarray, p: np.ndarray, h: float) -> np.ndarray:
    """
    Trapezoid values of int_0^{x_k} K(x_k - z) P(z) dz for every node k.

    Args:
        kernel (np.ndarray): Kernel samples, shape (>= n, N, N).
        p (np.ndarray): Integrand factor samples, shape (n, N, M).
        h (float): Grid step.

    Returns:
        np.ndarray: Shape (n, N, M).
    """
    n = p.shape[0]
    k = kernel[:n]
    if n == 1:
        return np.zeros((1, k.shape[1], p.shape[2]))
    conv = fftconvolve(k[:, :, :, None], p[:, None, :, :], axes=0)[:n].sum(axis=2)
    out = conv - 0.5 * (k @ p[0]) - 0.5 * (k[0] @ p)
    out[0] = 0.0
    return h * out


def _forward(problem: VolterraProblem) -> np.ndarray:
    hh = problem.inhomogeneity.values
    n, nn = hh.shape[0], hh.shape[1]
    h = problem.h
    kernel = problem.kernel.values[:n]
    w = problem.weights()

    # Kcat[:, m N:(m+1) N] = K[n - 1 - m] so that a contiguous slice pairs K[k - j] with P[j]
    kcat = np.ascontiguousarray(kernel[::-1].transpose(1, 0, 2).reshape(nn, n * nn))
    p_flat = np.zeros((n * nn, nn))
    k0 = kernel[0]
    explicit = not np.any(k0)

    out = np.empty_like(hh)
    out[0] = hh[0]
    p_flat[:nn] = w[0][:, None] * out[0]
    for k in range(1, n):
        s = kcat[:, (n - 1 - k) * nn : (n - 1) * nn] @ p_flat[: k * nn]
        s -= 0.5 * kernel[k] @ p_flat[:nn]
        rhs = hh[k] + h * s
        if explicit:
            out[k] = rhs
        else:
            a = np.eye(nn) - 0.5 * h * k0 * w[k][None, :]
            out[k] = safe_solve(a, rhs, "Volterra diagonal step")
        p_flat[k * nn : (k + 1) * nn] = w[k][:, None] * out[k]
    return out


def _picard(problem: VolterraProblem, tol: float, max_iter: int) -> np.ndarray:
    hh = problem.inhomogeneity.values
    n = hh.shape[0]
    kernel = problem.kernel.values[:n]
    w = problem.weights()
    current = hh.copy()
    for iteration in range(1, max_iter + 1):
        updated = hh + trapezoid_convolution(kernel, w[:, :, None] * current, problem.h)
        change = np.abs(updated - current).max()
        current = updated
        if change <= tol * (1.0 + np.abs(updated).max()):
            logger.debug(f"Picard iteration converged after {iteration} sweeps")
            return current
    raise ConvergenceError(
        f"Picard iteration did not converge in {max_iter} sweeps (last change {change:.3e})",
        details={"iterations": max_iter, "last_change": float(change)},
    )


def volterra_solve(
    problem: VolterraProblem,
    mode: SolverMode = "forward",
    tol: float = 1e-13,
    max_iter: int = PICARD_MAX_ITER,
) -> MatrixGrid:
    """
    Solve the matrix Volterra equation of the second kind with trapezoid quadrature.

    Args:
        problem (VolterraProblem): Kernel, weight and inhomogeneity on a shared grid.
        mode (SolverMode): "forward" (node-by-node substitution) or "picard" (fixed-point
            sweeps with FFT convolution). Both converge to the same discrete solution.
        tol (float): Picard stopping tolerance, relative. Defaults to 1e-13.
        max_iter (int): Picard sweep limit. Defaults to 200.

    Returns:
        MatrixGrid: H on the grid of the inhomogeneity.
    """
    if mode == "forward":
        values = _forward(problem)
    elif mode == "picard":
        values = _picard(problem, tol, max_iter)
    else:
        raise ValidationError(f"Invalid solver mode: {mode}. Valid modes are: forward, picard")
    if not np.all(np.isfinite(values)):
        raise ConvergenceError("Volterra solution overflowed", code="overflow")
    return MatrixGrid(problem.origin, problem.h, values)


def volterra_residual(problem: VolterraProblem, solution: MatrixGrid, stride: int = 1) -> np.ndarray:
    """
    Residual of a computed grid against the continuous equation, with the integral evaluated
    by composite Simpson quadrature.

    Args:
        problem (VolterraProblem): The equation.
        solution (MatrixGrid): Candidate solution on the problem grid.
        stride (int): Check every stride-th node. Defaults to 1.

    Returns:
        np.ndarray: Max-abs residual at each checked node.
    """
    hh = problem.inhomogeneity.values
    n = hh.shape[0]
    if len(solution) != n:
        raise ValidationError(f"solution has {len(solution)} nodes, problem has {n}")
    kernel = problem.kernel.values[:n]
    p = problem.weights()[:, :, None] * solution.values
    nodes = range(0, n, max(1, int(stride)))
    out = np.empty(len(nodes))
    for i, k in enumerate(nodes):
        if k == 0:
            integral = 0.0
        else:
            integrand = kernel[k::-1] @ p[: k + 1]
            integral = simpson(integrand, dx=problem.h, axis=0)
        out[i] = np.abs(solution.values[k] - hh[k] - integral).max()
    return out
