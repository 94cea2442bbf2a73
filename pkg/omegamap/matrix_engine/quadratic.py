import logging
from dataclasses import dataclass
import numpy as np
from scipy.linalg import eig, schur
from ..errors import ConditioningError
from .linalg import safe_inv

logger = logging.getLogger(__name__)

EIGVEC_COND_LIMIT = 1e8


@dataclass(frozen=True, eq=False)
class QuadraticMatrixProblem:
    """
    a2 X^2 + a1 X + a0 = 0 with a2 invertible.

    Args:
        a2 (np.ndarray): Coefficient of X^2 (here diag(sigma^2 / 2)).
        a1 (np.ndarray): Coefficient of X (here -/+ diag(mu)).
        a0 (np.ndarray): Constant term (here Q - qI).
    """

    a2: np.ndarray
    a1: np.ndarray
    a0: np.ndarray

    @property
    def n(self) -> int:
        return int(np.shape(self.a0)[0])

    def residual(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.a2 @ x @ x + self.a1 @ x + self.a0, "fro"))

    def companion(self) -> np.ndarray:
        """
        First companion linearization [[0, I], [-a2^{-1} a0, -a2^{-1} a1]]; its eigenpairs
        (lam, [v; lam v]) are exactly the latent pairs of the quadratic.
        """
        n = self.n
        a2_inv = safe_inv(self.a2, "quadratic leading coefficient")
        top = np.hstack([np.zeros((n, n)), np.eye(n)])
        bottom = np.hstack([-a2_inv @ self.a0, -a2_inv @ self.a1])
        return np.vstack([top, bottom])


def _split_threshold(eigvals: np.ndarray, n: int) -> float:
    re = np.sort(eigvals.real)
    gap = re[n] - re[n - 1]
    scale = 1.0 + np.abs(re).max()
    if not gap > 1e-10 * scale:
        raise ConditioningError(
            f"Cannot split the spectrum into {n} stable and {n} unstable eigenvalues (gap {gap:.3e})",
            details={"real_parts": re.tolist()},
        )
    return 0.5 * (re[n] + re[n - 1])


def _from_eigenvectors(eigvals: np.ndarray, vecs: np.ndarray, n: int, threshold: float):
    keep = eigvals.real < threshold
    if np.count_nonzero(keep) != n:
        raise ConditioningError(f"Selected {np.count_nonzero(keep)} eigenvalues, expected {n}")
    v_top = vecs[:n, keep]
    cond = np.linalg.cond(v_top)
    if not cond < EIGVEC_COND_LIMIT:
        return None, cond
    x = v_top @ np.diag(eigvals[keep]) @ np.linalg.inv(v_top)
    return x, cond


def _from_schur(comp: np.ndarray, n: int, threshold: float) -> np.ndarray:
    _, z, sdim = schur(comp, output="complex", sort=lambda lam: lam.real < threshold)
    if sdim != n:
        raise ConditioningError(f"Schur reordering isolated {sdim} eigenvalues, expected {n}")
    u1, u2 = z[:n, :n], z[n:, :n]
    cond = np.linalg.cond(u1)
    if not cond < EIGVEC_COND_LIMIT:
        raise ConditioningError(f"Schur invariant subspace is ill-conditioned (cond {cond:.3e})")
    # X = U2 U1^{-1}
    return np.linalg.solve(u1.T, u2.T).T


def solve_quadratic_stable(p: QuadraticMatrixProblem) -> np.ndarray:
    """
    The solvent of a2 X^2 + a1 X + a0 = 0 whose eigenvalues are the N latent roots with the
    most negative real parts (all with real part <= 0 for the problems built here).

    Args:
        p (QuadraticMatrixProblem): The quadratic matrix equation.

    Returns:
        np.ndarray: Real N x N solvent.
    """
    n = p.n
    comp = p.companion()
    eigvals, vecs = eig(comp)
    threshold = _split_threshold(eigvals, n)

    x, cond = _from_eigenvectors(eigvals, vecs, n, threshold)
    if x is None:
        logger.warning(f"Eigenvector matrix condition {cond:.3e}; using ordered Schur form")
        x = _from_schur(comp, n, threshold)

    if np.abs(x.imag).max(initial=0.0) > 1e-8 * (1.0 + np.abs(x).max()):
        raise ConditioningError("Solvent has a non-negligible imaginary part")
    x = np.real(x)

    tol = 1e-10 * (np.linalg.norm(p.a0, "fro") + 1.0)
    residual = p.residual(x)
    if residual > tol and cond < EIGVEC_COND_LIMIT:
        logger.debug(f"Eigenvector route residual {residual:.3e}; retrying with Schur form")
        x = _from_schur(comp, n, threshold).real
        residual = p.residual(x)
    if residual > tol:
        raise ConditioningError(
            f"Quadratic solvent residual {residual:.3e} exceeds {tol:.3e}",
            details={"residual": residual},
        )
    return x
