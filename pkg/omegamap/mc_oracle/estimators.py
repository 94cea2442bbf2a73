from typing import List, Tuple
import numpy as np
from ..errors import ValidationError
from ..model import MapModel, OmegaFn
from .config import McEstimate, PathConfig, ResolventEstimate
from .engine import CENSORED, DOWN, UP, ChunkTally, Scenario, simulate


def _starts(model: MapModel, j0: int | None) -> List[int]:
    if j0 is None:
        return list(range(model.n_states))
    if not 0 <= j0 < model.n_states:
        raise ValidationError(f"state {j0} out of range 0..{model.n_states - 1}", code="state_out_of_range")
    return [int(j0)]


def _blank(n_states: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    mat = np.full((n_states, n_states), np.nan)
    row = np.full(n_states, np.nan)
    return mat, mat.copy(), row, row.copy()


def _binomial_se(p: np.ndarray | float, n: int) -> np.ndarray | float:
    # floored at p(1 - p) = 1/n so that cells with no or all hits keep a nonzero error
    return np.sqrt(np.maximum(p * (1 - p), 1.0 / n) / n)


def _binomial(tallies: List[ChunkTally], starts: List[int], code: int, n_states: int) -> McEstimate:
    mean, se, row_mean, row_se = _blank(n_states)
    censored = 0
    for s, tally in zip(starts, tallies):
        p = tally.outcomes[code] / tally.n
        mean[s], se[s] = p, _binomial_se(p, tally.n)
        total = p.sum()
        row_mean[s], row_se[s] = total, _binomial_se(total, tally.n)
        censored += int(tally.outcomes[CENSORED].sum())
    return McEstimate(mean, se, row_mean, row_se, sum(t.n for t in tallies), censored)


def _sample_se(total: np.ndarray | float, total_sq: np.ndarray | float, n: int):
    m = total / n
    var = np.maximum(total_sq / n - m**2, 0.0) * n / max(n - 1, 1)
    return m, np.sqrt(var / n)


def simulate_exit(
    model: MapModel,
    om: OmegaFn,
    d: float,
    x0: float,
    c: float,
    j0: int | None,
    cfg: PathConfig,
    max_workers: int | None = None,
) -> Tuple[McEstimate, McEstimate]:
    """
    Monte Carlo estimates of the omega-killed two-sided exit matrices (up, down).

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        d (float): Lower barrier.
        x0 (float): Starting level, d <= x0 <= c.
        c (float): Upper barrier.
        j0 (int | None): Zero-based starting state, or None for every state.
        cfg (PathConfig): Simulation settings.
        max_workers (int | None): Worker processes. Defaults to None.

    Returns:
        Tuple[McEstimate, McEstimate]: Estimates of A (up) and B (down).
    """
    if not d <= x0 <= c:
        raise ValidationError(f"need d <= x0 <= c, got {d}, {x0}, {c}", code="invalid_levels")
    starts = _starts(model, j0)
    tallies = simulate(model, om, cfg, Scenario(lower=d, upper=c), x0, starts, max_workers)
    return (
        _binomial(tallies, starts, UP, model.n_states),
        _binomial(tallies, starts, DOWN, model.n_states),
    )


def simulate_one_sided_down(
    model: MapModel,
    om: OmegaFn,
    x0: float,
    j0: int | None,
    cfg: PathConfig,
    d: float = 0.0,
    max_workers: int | None = None,
) -> McEstimate:
    """
    Monte Carlo estimate of E_x[e^{-int omega}, tau_d- < inf, J at tau_d- | J_0]; paths still
    alive at t_max count as no event and are reported in n_censored.
    """
    if x0 < d:
        raise ValidationError(f"need x0 >= d, got x0 = {x0}, d = {d}", code="invalid_levels")
    starts = _starts(model, j0)
    tallies = simulate(model, om, cfg, Scenario(lower=d), x0, starts, max_workers)
    return _binomial(tallies, starts, DOWN, model.n_states)


def simulate_dividends(
    model: MapModel,
    om: OmegaFn,
    d: float,
    x0: float,
    c: float,
    j0: int | None,
    delta: float,
    cfg: PathConfig,
    max_workers: int | None = None,
) -> McEstimate:
    """
    Monte Carlo estimate of the discounted dividends of the barrier strategy at c, paid until
    omega ruin (crossing below -d or killing by omega). Each path's total is attributed to the
    state at ruin, or at censoring.

    Args:
        model (MapModel): The MMBM surplus.
        om (OmegaFn): Bankruptcy intensity.
        d (float): Depth of the ruin floor.
        x0 (float): Initial surplus, x0 > -d.
        c (float): Dividend barrier.
        j0 (int | None): Zero-based starting state, or None for every state.
        delta (float): Discount rate.
        cfg (PathConfig): Simulation settings.
        max_workers (int | None): Worker processes. Defaults to None.

    Returns:
        McEstimate: Value matrix estimate with its row sums.
    """
    if not x0 > -d:
        raise ValidationError(f"initial surplus {x0} must exceed the floor {-d}", code="invalid_levels")
    starts = _starts(model, j0)
    scenario = Scenario(lower=-d, upper=c, reflect=True, delta=delta)
    tallies = simulate(model, om, cfg, scenario, x0, starts, max_workers)
    mean, se, row_mean, row_se = _blank(model.n_states)
    censored = 0
    for s, tally in zip(starts, tallies):
        mean[s], se[s] = _sample_se(tally.payout_sum, tally.payout_sq, tally.n)
        row_mean[s], row_se[s] = _sample_se(tally.payout_sum.sum(), tally.payout_total_sq, tally.n)
        censored += int(tally.outcomes[CENSORED].sum())
    return McEstimate(mean, se, row_mean, row_se, sum(t.n for t in tallies), censored)


def simulate_resolvent(
    model: MapModel,
    om: OmegaFn,
    d: float,
    x0: float,
    c: float,
    j0: int | None,
    y_bins: np.ndarray,
    cfg: PathConfig,
    max_workers: int | None = None,
) -> ResolventEstimate:
    """
    Occupation-time estimate of the resolvent density on (d, c): every sub-step adds
    e^{-int omega} dt to the bin of the current level and state until the path leaves the window.

    Args:
        model (MapModel): The MMBM.
        om (OmegaFn): Killing intensity.
        d (float): Lower end of the window (may be -inf).
        x0 (float): Starting level.
        c (float): Upper end of the window (may be inf).
        j0 (int | None): Zero-based starting state, or None for every state.
        y_bins (np.ndarray): Increasing bin edges inside the window.
        cfg (PathConfig): Simulation settings.
        max_workers (int | None): Worker processes. Defaults to None.

    Returns:
        ResolventEstimate: Density per bin with shape (n_bins, N, N).
    """
    edges = np.asarray(y_bins, dtype=float)
    errors = []
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        errors.append("y_bins must be at least two increasing edges")
    elif edges[0] < d or edges[-1] > c:
        errors.append(f"y_bins must lie inside the window ({d}, {c})")
    if not d <= x0 <= c:
        errors.append(f"need d <= x0 <= c, got {d}, {x0}, {c}")
    if errors:
        raise ValidationError(errors, code="invalid_bins")

    starts = _starts(model, j0)
    scenario = Scenario(lower=d, upper=c, weighted=True, edges=edges)
    tallies = simulate(model, om, cfg, scenario, x0, starts, max_workers)
    n_states, n_bins = model.n_states, edges.size - 1
    widths = np.diff(edges)
    density = np.full((n_bins, n_states, n_states), np.nan)
    std_err = np.full((n_bins, n_states, n_states), np.nan)
    reliable = np.ones(n_bins, dtype=bool)
    censored = 0
    for s, tally in zip(starts, tallies):
        m, se = _sample_se(tally.occupation_sum, tally.occupation_sq, tally.n)
        visited = tally.occupation_sum > 0
        se = np.where(visited, se, np.inf)
        density[:, s, :] = (m / widths).T
        std_err[:, s, :] = (se / widths).T
        reliable &= visited.any(axis=0)
        censored += int(tally.outcomes[CENSORED].sum())
    return ResolventEstimate(edges, density, std_err, reliable, sum(t.n for t in tallies), censored)
