from dataclasses import dataclass
import numpy as np
from ..errors import ValidationError


@dataclass(frozen=True, eq=False)
class MatrixGrid:
    """
    A matrix-valued function sampled on a uniform grid: values[k] ~ M(x0 + k * h).

    Args:
        x0 (float): Grid origin.
        h (float): Positive step.
        values (np.ndarray): Array of shape (n, N, N).
    """

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None, None]
        errors = []
        if not self.h > 0:
            errors.append(f"grid step h = {self.h} must be > 0")
        if values.ndim != 3 or values.shape[1] != values.shape[2]:
            errors.append(f"grid values must have shape (n, N, N), got {values.shape}")
        elif values.shape[0] < 1:
            errors.append("grid must hold at least one node")
        if errors:
            raise ValidationError(errors, code="invalid_grid")
        values.setflags(write=False)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixGrid):
            return NotImplemented
        return self.x0 == other.x0 and self.h == other.h and np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def n_states(self) -> int:
        return int(self.values.shape[1])

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self))

    @property
    def x_max(self) -> float:
        return self.x0 + self.h * (len(self) - 1)

    def index_of(self, x: float) -> int:
        """
        Index of the node at x; raises if x is not (within round-off) a grid node.
        """
        k = (x - self.x0) / self.h
        idx = int(round(k))
        if abs(k - idx) > 1e-6 or not 0 <= idx < len(self):
            raise ValidationError(f"x = {x} is not a node of the grid [{self.x0}, {self.x_max}] step {self.h}")
        return idx

    def at(self, x: float) -> np.ndarray:
        """
        Linear interpolation between nodes.

        Args:
            x (float): Level inside [x0, x_max].

        Returns:
            np.ndarray: N x N matrix.
        """
        k = (x - self.x0) / self.h
        n = len(self)
        if k < -1e-9 or k > n - 1 + 1e-9:
            raise ValidationError(f"x = {x} outside grid [{self.x0}, {self.x_max}]", code="outside_grid")
        k = min(max(k, 0.0), n - 1.0)
        lo = min(int(np.floor(k)), n - 1)
        hi = min(lo + 1, n - 1)
        frac = k - lo
        return (1 - frac) * self.values[lo] + frac * self.values[hi]

    def row_sums(self) -> np.ndarray:
        """Array of shape (n, N): M(x) 1 at every node."""
        return self.values.sum(axis=2)


def uniform_nodes(x_min: float, x_max: float, h: float) -> np.ndarray:
    """
    Nodes x_min, x_min + h, ... covering [x_min, x_max]; the last node is >= x_max - 1e-9 h.
    """
    if not h > 0:
        raise ValidationError(f"grid step h = {h} must be > 0", code="invalid_grid")
    if x_max < x_min:
        raise ValidationError(f"grid bounds reversed: {x_min} > {x_max}", code="invalid_grid")
    n = int(np.ceil((x_max - x_min) / h - 1e-9)) + 1
    return x_min + h * np.arange(n)
