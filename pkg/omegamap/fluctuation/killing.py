from dataclasses import dataclass
import numpy as np
from scipy.integrate import simpson
from ..model import MapModel, OmegaFn
from ..scale_omega import SolverMode
from ..scale_omega.omega_scale import DEFAULT_STEP
from .common import check_ordered
from .exit import ExitResult, two_sided_exit
from .resolvent import Window, resolvent_density

DEFAULT_Y_STEP = 0.05


@dataclass(frozen=True, eq=False)
class KillingResult:
    """
    Probability matrix of being killed by omega inside (d, c) before exiting, with the exit
    matrices it is checked against. `defect` is (A 1 + B 1 + K 1) - 1 per starting state.
    """

    kill: np.ndarray
    exit: ExitResult
    defect: np.ndarray


def _piece_nodes(a: float, b: float, y_step: float) -> np.ndarray:
    m = max(2, 2 * int(np.ceil((b - a) / (2 * y_step))))
    return np.linspace(a, b, m + 1)


def killing_probability(
    model: MapModel,
    om: OmegaFn,
    d: float,
    x: float,
    c: float,
    h: float = DEFAULT_STEP,
    y_step: float = DEFAULT_Y_STEP,
    mode: SolverMode = "forward",
    extrapolate: bool = False,
    max_workers: int | None = None,
) -> KillingResult:
    """
    K(x) = int_d^c U(x, dy) diag(omega(y)), the matrix of killing probabilities by final state.
    The y integral is composite Simpson, split at x where the density has a kink.

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        d (float): Lower barrier.
        x (float): Starting level.
        c (float): Upper barrier.
        h (float): Volterra grid step. Defaults to 1e-3.
        y_step (float): Target spacing of the y quadrature. Defaults to 0.05.
        mode (SolverMode): Volterra solver mode. Defaults to "forward".
        extrapolate (bool): Richardson-combine the grids. Defaults to False.
        max_workers (int | None): Worker processes for the per-y solves. Defaults to None.

    Returns:
        KillingResult: The kill matrix, the exit matrices and the conservation defect.
    """
    check_ordered(d, x, c)
    exit_result = two_sided_exit(model, om, d, x, c, h, mode, extrapolate)
    n = model.n_states
    kill = np.zeros((n, n))
    if om.bound_lambda > 0:
        window = Window(float(d), float(c))
        for a, b in ((d, x), (x, c)):
            if b <= a:
                continue
            ys = _piece_nodes(a, b, y_step)
            density = resolvent_density(
                model, om, x, ys, window, h=h, mode=mode, extrapolate=extrapolate, max_workers=max_workers
            )
            kill += simpson(density * om.values(ys)[:, None, :], x=ys, axis=0)
    defect = (exit_result.up + exit_result.down + kill).sum(axis=1) - 1.0
    return KillingResult(kill, exit_result, defect)
