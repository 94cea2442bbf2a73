import logging
from dataclasses import dataclass
from typing import Callable, Literal, Sequence, Tuple
import numpy as np
from ..errors import ValidationError
from ..matrix_engine import safe_solve
from ..model import GridSpec, MapModel, MatrixGrid, OmegaFn
from ..scale_omega import SolverMode, omega_h, omega_w
from ..scale_omega.omega_scale import DEFAULT_STEP
from ..utils import run_batch
from .common import LIMIT_SCHEDULE, LIMIT_TOL, converge_limit, value_at
from .one_sided import h_value

logger = logging.getLogger(__name__)

WindowKind = Literal["interval", "above", "below", "line"]


@dataclass(frozen=True)
class Window:
    """Killing window (lower, upper); None stands for an infinite endpoint."""

    lower: float | None
    upper: float | None

    @property
    def kind(self) -> WindowKind:
        if self.lower is not None and self.upper is not None:
            return "interval"
        if self.lower is not None:
            return "above"
        if self.upper is not None:
            return "below"
        return "line"

    def contains(self, t: float) -> bool:
        return (self.lower is None or self.lower <= t) and (self.upper is None or t <= self.upper)


@dataclass(frozen=True, eq=False)
class ResolventGrid:
    """Density in y of the omega-killed resolvent U(x, dy) for a fixed start x."""

    density: MatrixGrid
    window: Window
    x: float


@dataclass(frozen=True, eq=False)
class _ColumnJob:
    model: MapModel
    om: OmegaFn
    h: float
    mode: SolverMode
    extrapolate: bool
    probes: Tuple[float, ...]


def _w_column(job: _ColumnJob, y: float) -> np.ndarray:
    """W(p, y) for every probe p; zero where p <= y."""
    n = job.model.n_states
    out = np.zeros((len(job.probes), n, n))
    top = max(job.probes)
    if top <= y:
        return out
    grid = omega_w(job.model, job.om, y, top, job.h, mode=job.mode, extrapolate=job.extrapolate)
    for i, p in enumerate(job.probes):
        out[i] = value_at(grid, p)
    return out


def w_columns(
    model: MapModel,
    om: OmegaFn,
    ys: np.ndarray,
    probes: Sequence[float],
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    max_workers: int | None = None,
) -> np.ndarray:
    """
    W(p, y) for every second argument y and probe p, one Volterra solve per y.

    Returns:
        np.ndarray: Shape (len(ys), len(probes), N, N).
    """
    job = _ColumnJob(model, om, h, mode, extrapolate, tuple(float(p) for p in probes))
    columns = run_batch(_w_column, [float(y) for y in ys], job, max_workers, desc="W(., y) solves")
    return np.stack(columns)


def _anchor(
    model: MapModel,
    om: OmegaFn,
    window: Window,
    beta: float | None,
    level: float,
    top: float,
    h: float,
    mode: SolverMode,
    extrapolate: bool,
) -> Callable[[float], np.ndarray]:
    if window.lower is not None:
        grid = omega_w(model, om, window.lower, top, h, mode=mode, extrapolate=extrapolate)
        return lambda t: value_at(grid, t)
    grid = omega_h(model, om, beta, max(top, level), h, level, mode, extrapolate)
    return lambda t: h_value(model, beta, grid, t, level)


def resolvent_density(
    model: MapModel,
    om: OmegaFn,
    x: float,
    ys: np.ndarray,
    window: Window,
    beta: float | None = None,
    level: float = 0.0,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    schedule: Sequence[float] = LIMIT_SCHEDULE,
    tol: float = LIMIT_TOL,
    max_workers: int | None = None,
) -> np.ndarray:
    """
    Density of U(x, dy) at the points ys, as F(x) G(y) - W(x, y) with F the anchor of the window
    (W(., d) for a finite lower end, H otherwise) and G(y) = F(c)^{-1} W(c, y), or its c -> inf
    limit when the upper end is infinite.

    Returns:
        np.ndarray: Shape (len(ys), N, N).
    """
    ys = np.asarray(ys, dtype=float)
    errors = []
    if not window.contains(x):
        errors.append(f"x = {x} lies outside the window ({window.lower}, {window.upper})")
    if not all(window.contains(y) for y in ys):
        errors.append(f"y points must lie inside the window ({window.lower}, {window.upper})")
    if window.lower is None and beta is None:
        errors.append("an infinite lower end needs beta, the value of omega below `level`")
    if errors:
        raise ValidationError(errors, code="invalid_window")

    def density_for(c: float) -> Tuple[np.ndarray, np.ndarray]:
        anchor = _anchor(model, om, window, beta, level, max(c, x), h, mode, extrapolate)
        cols = w_columns(model, om, ys, (x, c), h, mode, extrapolate, max_workers)
        f_c = anchor(c)
        g = np.stack([safe_solve(f_c, col[1], f"anchor at c = {c}") for col in cols])
        return g, anchor(x) @ g - cols[:, 0]

    if window.upper is not None:
        _, density = density_for(window.upper)
        return density

    base = max([x, float(ys.max())] + [b for b in (window.lower, level) if b is not None])
    _, density = converge_limit(lambda length: density_for(base + length), "resolvent constant", schedule, tol)
    return density


def resolvent(
    model: MapModel,
    om: OmegaFn,
    x: float,
    y_grid: GridSpec,
    window: Window,
    beta: float | None = None,
    level: float = 0.0,
    h: float = DEFAULT_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    schedule: Sequence[float] = LIMIT_SCHEDULE,
    tol: float = LIMIT_TOL,
    max_workers: int | None = None,
) -> ResolventGrid:
    """
    Omega-killed resolvent density y -> U(x, dy)/dy on a uniform y grid, for one of the windows
    (d, c), (d, inf), (-inf, c) and (-inf, inf).

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        x (float): Starting level inside the window.
        y_grid (GridSpec): Uniform grid of y values inside the window.
        window (Window): The window; None marks an infinite end.
        beta (float, optional): Value of omega on (-inf, level], needed for an infinite lower end.
        level (float): See `beta`. Defaults to 0.
        h (float): Volterra grid step. Defaults to 1e-3.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.
        schedule (Sequence[float]): Truncation lengths for infinite upper ends.
        tol (float): Cauchy tolerance of the limit constants. Defaults to 1e-7.
        max_workers (int | None): Worker processes for the per-y solves. Defaults to None.

    Returns:
        ResolventGrid: The density on y_grid.
    """
    ys = y_grid.nodes()
    ys = ys[ys <= y_grid.x_max + 1e-9 * y_grid.h]
    logger.info(f"resolvent on window ({window.lower}, {window.upper}) from x = {x}: {len(ys)} y points")
    density = resolvent_density(
        model, om, x, ys, window, beta, level, h, mode, extrapolate, schedule, tol, max_workers
    )
    return ResolventGrid(MatrixGrid(float(ys[0]), y_grid.h, density), window, float(x))
