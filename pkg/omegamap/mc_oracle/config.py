from dataclasses import dataclass
from typing import List
import numpy as np
from ..errors import ValidationError

CHUNK_PATHS = 10_000


@dataclass(frozen=True)
class PathConfig:
    """
    Path simulation settings.

    Args:
        dt (float): Brownian sub-step inside state holdings. Defaults to 1e-3.
        t_max (float): Censoring horizon. Defaults to 200.
        n_paths (int): Paths per starting state. Defaults to 100,000.
        seed (int): Root seed; chunk streams are spawned from it. Defaults to 0.
        bridge_correction (bool): Detect barrier hits between grid times with the Brownian
            bridge, and reflect with the bridge maximum. Defaults to True.
    """

    dt: float = 1e-3
    t_max: float = 200.0
    n_paths: int = 100_000
    seed: int = 0
    bridge_correction: bool = True

    def __post_init__(self):
        errors = []
        if not self.dt > 0:
            errors.append(f"dt = {self.dt} must be > 0")
        if not self.t_max > 0:
            errors.append(f"t_max = {self.t_max} must be > 0")
        if self.n_paths < 1:
            errors.append(f"n_paths = {self.n_paths} must be >= 1")
        if self.seed < 0:
            errors.append(f"seed = {self.seed} must be >= 0")
        if errors:
            raise ValidationError(errors, code="invalid_path_config")

    def chunks(self) -> List[int]:
        """Sizes of the fixed chunks the paths of one starting state are split into."""
        full, rest = divmod(self.n_paths, CHUNK_PATHS)
        return [CHUNK_PATHS] * full + ([rest] if rest else [])


@dataclass(frozen=True, eq=False)
class McEstimate:
    """
    Monte Carlo estimate of an N x N matrix; rows of starting states that were not simulated
    are NaN. `row_mean` and `row_std_err` estimate the row sums directly.
    """

    mean: np.ndarray
    std_err: np.ndarray
    row_mean: np.ndarray
    row_std_err: np.ndarray
    n_paths: int
    n_censored: int

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n_paths if self.n_paths else 0.0

    def within(self, value: np.ndarray, n_se: float = 3.0, rows_only: bool = False) -> bool:
        """True when value lies within n_se standard errors at every simulated entry."""
        if rows_only:
            est, se, value = self.row_mean, self.row_std_err, np.asarray(value).sum(axis=-1)
        else:
            est, se = self.mean, self.std_err
        mask = ~np.isnan(est)
        return bool(np.all(np.abs(np.asarray(value)[mask] - est[mask]) <= n_se * se[mask] + 1e-12))


@dataclass(frozen=True, eq=False)
class ResolventEstimate:
    """
    Binned occupation density per (starting state, current state). Bins never visited have an
    infinite standard error and are flagged unreliable.
    """

    edges: np.ndarray
    density: np.ndarray
    std_err: np.ndarray
    reliable: np.ndarray
    n_paths: int
    n_censored: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])
