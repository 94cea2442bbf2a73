from dataclasses import dataclass, field
from typing import List
import numpy as np
from scipy.sparse.csgraph import connected_components
from ..errors import ValidationError

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MapModel:
    """
    Markov-modulated Brownian motion: generator Q of the phase process and per-state
    Brownian parameters. Arrays are copied and made read-only on construction.

    Args:
        q_gen (np.ndarray): N x N generator matrix Q.
        sigma (np.ndarray): Per-state volatilities, all > 0.
        mu (np.ndarray): Per-state drifts.
    """

    q_gen: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray
    n_states: int = field(init=False)

    def __post_init__(self):
        q_gen = np.array(self.q_gen, dtype=float, ndmin=2)
        sigma = np.array(self.sigma, dtype=float, ndmin=1)
        mu = np.array(self.mu, dtype=float, ndmin=1)
        for arr in (q_gen, sigma, mu):
            arr.setflags(write=False)
        object.__setattr__(self, "q_gen", q_gen)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "n_states", int(sigma.shape[0]))

        errors = validate_model_arrays(q_gen, sigma, mu)
        if errors:
            raise ValidationError(errors, code="invalid_model")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MapModel):
            return NotImplemented
        return (
            np.array_equal(self.q_gen, other.q_gen)
            and np.array_equal(self.sigma, other.sigma)
            and np.array_equal(self.mu, other.mu)
        )

    __hash__ = None

    @property
    def var_half(self) -> np.ndarray:
        """Diagonal matrix of sigma_i^2 / 2."""
        return np.diag(self.sigma**2 / 2)

    @property
    def two_over_var(self) -> np.ndarray:
        """Diagonal matrix of 2 / sigma_i^2 (the derivative of W at 0)."""
        return np.diag(2 / self.sigma**2)

    def stationary(self) -> np.ndarray:
        """
        Stationary distribution pi of the generator (pi Q = 0, pi 1 = 1).

        Returns:
            np.ndarray: Length-N probability vector.
        """
        n = self.n_states
        a = np.vstack([self.q_gen.T, np.ones((1, n))])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
        return pi

    def kappa(self) -> float:
        """Asymptotic drift pi . mu."""
        return float(self.stationary() @ self.mu)


def validate_model_arrays(q_gen: np.ndarray, sigma: np.ndarray, mu: np.ndarray) -> List[str]:
    """
    Collect every violated MapModel invariant.

    Args:
        q_gen (np.ndarray): Candidate generator.
        sigma (np.ndarray): Candidate volatilities.
        mu (np.ndarray): Candidate drifts.

    Returns:
        List[str]: Violation messages, empty when valid.
    """
    errors = []
    n = sigma.shape[0]
    if n < 1:
        return ["n_states must be positive"]
    if q_gen.shape != (n, n):
        return [f"Q has shape {q_gen.shape}, expected ({n}, {n})"]
    if mu.shape != (n,):
        errors.append(f"mu has length {mu.shape[0]}, expected {n}")
    if not (np.all(np.isfinite(q_gen)) and np.all(np.isfinite(sigma)) and np.all(np.isfinite(mu))):
        errors.append("model parameters must be finite")
        return errors

    off = q_gen - np.diag(np.diag(q_gen))
    for i, j in zip(*np.nonzero(off < 0)):
        errors.append(f"Q[{i}][{j}] = {q_gen[i, j]} is negative off the diagonal")
    for i, s in enumerate(q_gen.sum(axis=1)):
        if abs(s) > ROW_SUM_TOL:
            errors.append(f"Q row {i} sums to {s}, expected 0")
    for i, s in enumerate(sigma):
        if not s > 0:
            errors.append(f"sigma[{i}] = {s} must be > 0")

    n_components, _ = connected_components(off > 0, directed=True, connection="strong")
    if n_components != 1:
        errors.append(f"Q is reducible ({n_components} communicating classes)")
    return errors


def laplace_exponent(model: MapModel, alpha: float) -> np.ndarray:
    """
    Matrix Laplace exponent F(alpha) = 1/2 diag(sigma^2) alpha^2 + diag(mu) alpha + Q.

    Args:
        model (MapModel): The MMBM.
        alpha (float): Argument.

    Returns:
        np.ndarray: N x N matrix.
    """
    return model.var_half * alpha**2 + np.diag(model.mu) * alpha + model.q_gen
