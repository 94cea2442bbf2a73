from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple
import numpy as np
from ..errors import ValidationError

OMEGA_KINDS = ("constant", "per_state", "step", "affine_band", "tabulated")


def _freeze(values: Any, ndmin: int = 1) -> np.ndarray:
    arr = np.array(values, dtype=float, ndmin=ndmin)
    arr.setflags(write=False)
    return arr


def _on_node(xs: np.ndarray, level: float) -> np.ndarray:
    return np.isclose(xs, level, rtol=0.0, atol=1e-12 * max(1.0, abs(level)))


class OmegaFn(ABC):
    """
    Bounded nonnegative killing intensity omega_i(x). Subclasses are immutable and
    vectorised over x; `sample` is what the Volterra layer consumes.
    """

    kind: str
    n_states: int

    @abstractmethod
    def values(self, xs: np.ndarray) -> np.ndarray:
        """
        Pointwise values at every state.

        Args:
            xs (np.ndarray): 1-D array of levels.

        Returns:
            np.ndarray: Array of shape (len(xs), N).
        """

    @property
    @abstractmethod
    def bound_lambda(self) -> float:
        """Supremum of omega over all states and levels."""

    @property
    @abstractmethod
    def lower_bound(self) -> float:
        """Infimum of omega over all states and levels."""

    @abstractmethod
    def constant_below(self, level: float) -> float | None:
        """
        The common value beta if omega_i(x) == beta for all i and all x <= level, else None.
        """

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Configuration representation (inverse of `omega_from_dict`)."""

    def jumps(self) -> List[Tuple[float, np.ndarray]]:
        """List of (level, right-limit minus value) for discontinuities; empty if continuous."""
        return []

    def sample(self, xs: np.ndarray) -> np.ndarray:
        """
        Grid weights of shape (len(xs), N). At a node lying on a jump the weight is the
        average of the one-sided limits, which keeps trapezoid quadrature second order.

        Args:
            xs (np.ndarray): Grid nodes.

        Returns:
            np.ndarray: Weights per node and state.
        """
        xs = np.asarray(xs, dtype=float)
        out = self.values(xs)
        for level, jump in self.jumps():
            hit = _on_node(xs, level)
            if np.any(hit):
                out[hit] = self.values(np.full(np.count_nonzero(hit), level)) + 0.5 * jump
        return out

    def check_state(self, state: int) -> None:
        if not 1 <= state <= self.n_states:
            raise ValidationError(
                f"state {state} out of range 1..{self.n_states}", code="state_out_of_range"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OmegaFn):
            return NotImplemented
        return self.to_dict() == other.to_dict() and self.n_states == other.n_states

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ConstantOmega(OmegaFn):
    beta: float
    n_states: int = 1
    kind = "constant"

    def values(self, xs):
        return np.full((np.size(xs), self.n_states), float(self.beta))

    @property
    def bound_lambda(self):
        return float(self.beta)

    @property
    def lower_bound(self):
        return float(self.beta)

    def constant_below(self, level):
        return float(self.beta)

    def to_dict(self):
        return {"kind": self.kind, "beta": float(self.beta)}


@dataclass(frozen=True, eq=False)
class PerStateOmega(OmegaFn):
    rates: np.ndarray
    kind = "per_state"

    def __post_init__(self):
        object.__setattr__(self, "rates", _freeze(self.rates))

    @property
    def n_states(self):
        return int(self.rates.shape[0])

    def values(self, xs):
        return np.tile(self.rates, (np.size(xs), 1))

    @property
    def bound_lambda(self):
        return float(self.rates.max())

    @property
    def lower_bound(self):
        return float(self.rates.min())

    def constant_below(self, level):
        return float(self.rates[0]) if np.all(self.rates == self.rates[0]) else None

    def to_dict(self):
        return {"kind": self.kind, "values": self.rates.tolist()}


@dataclass(frozen=True, eq=False)
class StepOmega(OmegaFn):
    """
    omega(x) = p_0 + sum_j (p_j - p_{j-1}) 1{x > x_j}, identical in every state.
    """

    levels: np.ndarray
    rates: np.ndarray
    n_states: int = 1
    kind = "step"

    def __post_init__(self):
        object.__setattr__(self, "levels", _freeze(self.levels))
        object.__setattr__(self, "rates", _freeze(self.rates))

    def values(self, xs):
        xs = np.asarray(xs, dtype=float)
        idx = np.searchsorted(self.levels, xs, side="left")
        return np.repeat(self.rates[idx][:, None], self.n_states, axis=1)

    def jumps(self):
        return [
            (float(level), np.full(self.n_states, self.rates[j + 1] - self.rates[j]))
            for j, level in enumerate(self.levels)
        ]

    @property
    def bound_lambda(self):
        return float(self.rates.max())

    @property
    def lower_bound(self):
        return float(self.rates.min())

    def constant_below(self, level):
        return float(self.rates[0]) if level <= self.levels[0] else None

    def to_dict(self):
        return {"kind": self.kind, "levels": self.levels.tolist(), "values": self.rates.tolist()}


@dataclass(frozen=True, eq=False)
class AffineBandOmega(OmegaFn):
    """
    omega(x) = (gamma0 + gamma1 (x + d)) on [-d, 0], zero elsewhere, identical in every state.
    """

    gamma0: float
    gamma1: float
    d: float
    n_states: int = 1
    kind = "affine_band"

    def values(self, xs):
        xs = np.asarray(xs, dtype=float)
        inside = (xs >= -self.d) & (xs <= 0)
        vals = np.where(inside, self.gamma0 + self.gamma1 * (xs + self.d), 0.0)
        return np.repeat(vals[:, None], self.n_states, axis=1)

    def jumps(self):
        # closed band: the node value is the inner limit, so the jump is measured outward
        top = self.gamma0 + self.gamma1 * self.d
        return [
            (-float(self.d), np.full(self.n_states, -self.gamma0)),
            (0.0, np.full(self.n_states, -top)),
        ]

    def sample(self, xs):
        xs = np.asarray(xs, dtype=float)
        out = self.values(xs)
        for level, jump in self.jumps():
            hit = _on_node(xs, level)
            out[hit] = out[hit] + 0.5 * jump
        return out

    @property
    def bound_lambda(self):
        return float(max(self.gamma0, self.gamma0 + self.gamma1 * self.d, 0.0))

    @property
    def lower_bound(self):
        return 0.0

    def constant_below(self, level):
        # a single point carries no mass
        return 0.0 if level <= -self.d else None

    def to_dict(self):
        return {
            "kind": self.kind,
            "gamma0": float(self.gamma0),
            "gamma1": float(self.gamma1),
            "d": float(self.d),
        }


@dataclass(frozen=True, eq=False)
class TabulatedOmega(OmegaFn):
    """
    Piecewise-linear omega per state, clamped to the end values outside the grid.
    """

    grid: np.ndarray
    table: np.ndarray
    kind = "tabulated"

    def __post_init__(self):
        object.__setattr__(self, "grid", _freeze(self.grid))
        object.__setattr__(self, "table", _freeze(self.table, ndmin=2))

    @property
    def n_states(self):
        return int(self.table.shape[0])

    def values(self, xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return np.stack([np.interp(xs, self.grid, row) for row in self.table], axis=1)

    @property
    def bound_lambda(self):
        return float(self.table.max())

    @property
    def lower_bound(self):
        return float(self.table.min())

    def constant_below(self, level):
        first = self.table[:, 0]
        if level > self.grid[0] or not np.all(first == first[0]):
            return None
        return float(first[0])

    def to_dict(self):
        return {"kind": self.kind, "x": self.grid.tolist(), "values": self.table.tolist()}


def omega_eval(om: OmegaFn, state: int, x: float) -> float:
    """
    Evaluate omega_i(x) for one state and level.

    Args:
        om (OmegaFn): Killing intensity.
        state (int): State label, 1..N.
        x (float): Level.

    Returns:
        float: omega_state(x).
    """
    om.check_state(state)
    return float(om.values(np.array([x], dtype=float))[0, state - 1])


def validate_omega(om: OmegaFn) -> List[str]:
    """
    Collect every violated OmegaFn invariant.

    Args:
        om (OmegaFn): Candidate killing intensity.

    Returns:
        List[str]: Violation messages, empty when valid.
    """
    errors = []
    if isinstance(om, ConstantOmega):
        if not om.beta >= 0:
            errors.append(f"omega beta = {om.beta} must be >= 0")
    elif isinstance(om, PerStateOmega):
        if np.any(om.rates < 0):
            errors.append("omega per-state values must be >= 0")
    elif isinstance(om, StepOmega):
        if om.rates.shape[0] != om.levels.shape[0] + 1:
            errors.append(
                f"step omega needs len(values) = len(levels) + 1, got {om.rates.shape[0]} and {om.levels.shape[0]}"
            )
        if om.levels.shape[0] < 1:
            errors.append("step omega needs at least one level")
        if np.any(np.diff(om.levels) <= 0):
            errors.append("step omega levels must be strictly increasing")
        if np.any(om.rates < 0):
            errors.append("step omega values must be >= 0")
    elif isinstance(om, AffineBandOmega):
        if not om.d >= 0:
            errors.append(f"affine band d = {om.d} must be >= 0")
        ends = (om.gamma0, om.gamma0 + om.gamma1 * om.d)
        if min(ends) < 0:
            errors.append("affine band gamma0 + gamma1 (x + d) must be >= 0 on [-d, 0]")
    elif isinstance(om, TabulatedOmega):
        if om.table.shape[1] != om.grid.shape[0]:
            errors.append("tabulated omega rows must have one value per grid point")
        if np.any(np.diff(om.grid) <= 0):
            errors.append("tabulated omega grid must be strictly increasing")
        if np.any(om.table < 0):
            errors.append("tabulated omega values must be >= 0")
    if not errors and not np.isfinite(om.bound_lambda):
        errors.append("omega must be bounded")
    return errors


def omega_from_dict(spec: Dict[str, Any] | None, n_states: int) -> OmegaFn:
    """
    Build an OmegaFn from its configuration mapping; a missing mapping means no killing.

    Args:
        spec (dict | None): The "omega" section of a configuration document.
        n_states (int): Number of phases N.

    Returns:
        OmegaFn: The validated killing intensity.
    """
    if spec is None:
        return ConstantOmega(0.0, n_states)

    kind = spec.get("kind")
    if kind == "constant":
        om = ConstantOmega(float(spec["beta"]), n_states)
    elif kind == "per_state":
        om = PerStateOmega(spec["values"])
    elif kind == "step":
        om = StepOmega(spec["levels"], spec["values"], n_states)
    elif kind == "affine_band":
        om = AffineBandOmega(float(spec["gamma0"]), float(spec["gamma1"]), float(spec["d"]), n_states)
    elif kind == "tabulated":
        om = TabulatedOmega(spec["x"], spec["values"])
    else:
        raise ValidationError(
            f"Invalid omega kind: {kind}. Valid kinds are: {', '.join(OMEGA_KINDS)}",
            code="invalid_omega",
        )

    errors = validate_omega(om)
    if om.n_states != n_states:
        errors.append(f"omega describes {om.n_states} states, model has {n_states}")
    if errors:
        raise ValidationError(errors, code="invalid_omega")
    return om
