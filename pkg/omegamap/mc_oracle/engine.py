import logging
from dataclasses import dataclass
from typing import List, Tuple
import numpy as np
from ..model import MapModel, OmegaFn
from ..utils import run_batch
from .config import PathConfig

logger = logging.getLogger(__name__)

CENSORED, UP, DOWN, KILLED = 0, 1, 2, 3


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    What a simulated path does at the barriers.

    Args:
        lower (float): Absorbing lower barrier (crossing below it ends the path). Defaults to -inf.
        upper (float): Absorbing upper barrier, or the reflecting one when `reflect`. Defaults to inf.
        reflect (bool): Reflect at `upper` and pay the pushed amount as dividends. Defaults to False.
        delta (float): Discount rate of the dividends. Defaults to 0.
        weighted (bool): Carry the weight e^{-int omega} instead of killing at an Exp(1)
            threshold. Defaults to False.
        edges (np.ndarray, optional): Bin edges of the occupation histogram. Defaults to None.
    """

    lower: float = -np.inf
    upper: float = np.inf
    reflect: bool = False
    delta: float = 0.0
    weighted: bool = False
    edges: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class ChunkJob:
    model: MapModel
    om: OmegaFn
    cfg: PathConfig
    scenario: Scenario
    x0: float


@dataclass(frozen=True, eq=False)
class ChunkTally:
    """Sums over the paths of one chunk; chunks add up in index order."""

    n: int
    outcomes: np.ndarray
    payout_sum: np.ndarray
    payout_sq: np.ndarray
    payout_total_sq: float
    occupation_sum: np.ndarray | None
    occupation_sq: np.ndarray | None

    def __add__(self, other: "ChunkTally") -> "ChunkTally":
        occ = None if self.occupation_sum is None else self.occupation_sum + other.occupation_sum
        occ_sq = None if self.occupation_sq is None else self.occupation_sq + other.occupation_sq
        return ChunkTally(
            self.n + other.n,
            self.outcomes + other.outcomes,
            self.payout_sum + other.payout_sum,
            self.payout_sq + other.payout_sq,
            self.payout_total_sq + other.payout_total_sq,
            occ,
            occ_sq,
        )


def _holding(rng: np.random.Generator, rates: np.ndarray, states: np.ndarray) -> np.ndarray:
    r = rates[states]
    draws = rng.standard_exponential(states.shape[0])
    return np.where(r > 0, draws / np.where(r > 0, r, 1.0), np.inf)


def _jump_cdf(q_gen: np.ndarray) -> np.ndarray:
    rates = -np.diag(q_gen)
    off = q_gen - np.diag(np.diag(q_gen))
    probs = np.divide(off, rates[:, None], out=np.zeros_like(off), where=rates[:, None] > 0)
    return np.cumsum(probs, axis=1)


def _bridge_hit(rng, gap_a: np.ndarray, gap_b: np.ndarray, var: np.ndarray) -> np.ndarray:
    """Crossing of a level between two endpoints on the same side, gaps measured to the level."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        p = np.exp(-2.0 * gap_a * gap_b / var)
    return rng.random(gap_a.shape[0]) < np.nan_to_num(p, nan=0.0)


def run_chunk(job: ChunkJob, item: Tuple[int, int, int]) -> ChunkTally:
    """
    Simulate one chunk of paths from (x0, start state): exact exponential holding times of the
    phase, Gaussian sub-steps of length at most dt inside holdings, and killing when the
    trapezoid integral of omega passes an Exp(1) threshold.

    Args:
        job (ChunkJob): Model, omega, settings and scenario.
        item (Tuple[int, int, int]): (start state, chunk index, number of paths).

    Returns:
        ChunkTally: Outcome counts, dividend and occupation sums of the chunk.
    """
    start, chunk, n = item
    model, om, cfg, sc = job.model, job.om, job.cfg, job.scenario
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(start, chunk)))
    n_states = model.n_states
    rates = -np.diag(model.q_gen)
    cdf = _jump_cdf(model.q_gen)
    mu, sigma = model.mu, model.sigma

    x = np.full(n, float(job.x0))
    j = np.full(n, start, dtype=int)
    t = np.zeros(n)
    k = np.zeros(n)
    threshold = np.full(n, np.inf) if sc.weighted else rng.standard_exponential(n)
    hold = _holding(rng, rates, j)
    payout = np.zeros(n)
    outcome = np.full(n, CENSORED)
    alive = np.ones(n, dtype=bool)
    n_bins = 0 if sc.edges is None else len(sc.edges) - 1
    occupation = np.zeros((n, n_states, n_bins)) if n_bins else None

    if sc.reflect and job.x0 > sc.upper:
        payout += job.x0 - sc.upper
        x[:] = sc.upper

    while True:
        act = np.flatnonzero(alive)
        if act.size == 0:
            break
        remaining = np.minimum(cfg.dt, cfg.t_max - t[act])
        while act.size:
            m = act.size
            seg = np.minimum(remaining, hold[act])
            ja, a = j[act], x[act]
            var = sigma[ja] ** 2 * seg
            b = a + mu[ja] * seg + np.sqrt(var) * rng.standard_normal(m)

            if occupation is not None:
                bins = np.searchsorted(sc.edges, a, side="right") - 1
                inside = (bins >= 0) & (bins < n_bins)
                np.add.at(
                    occupation,
                    (act[inside], ja[inside], bins[inside]),
                    (np.exp(-k[act]) * seg)[inside],
                )

            if sc.reflect:
                if cfg.bridge_correction:
                    u = rng.random(m)
                    peak = 0.5 * (a + b + np.sqrt((b - a) ** 2 - 2.0 * var * np.log(u)))
                else:
                    peak = np.maximum(a, b)
                lift = np.maximum(peak - sc.upper, 0.0)
                b = b - lift
                payout[act] += np.exp(-sc.delta * (t[act] + seg)) * lift
                up = np.zeros(m, dtype=bool)
            else:
                up = b >= sc.upper
                if cfg.bridge_correction and np.isfinite(sc.upper):
                    up |= _bridge_hit(rng, sc.upper - a, sc.upper - b, var) & (b < sc.upper)
            down = b < sc.lower
            if cfg.bridge_correction and np.isfinite(sc.lower):
                down |= _bridge_hit(rng, a - sc.lower, b - sc.lower, var) & (b >= sc.lower)
            down &= ~(b >= sc.upper)
            up &= ~down

            rate_a = om.values(a)[np.arange(m), ja]
            rate_b = om.values(b)[np.arange(m), ja]
            k_new = k[act] + 0.5 * (rate_a + rate_b) * seg
            killed = ~up & ~down & (k_new >= threshold[act])

            outcome[act[up]] = UP
            outcome[act[down]] = DOWN
            outcome[act[killed]] = KILLED
            alive[act[up | down | killed]] = False
            x[act], k[act] = b, k_new
            t[act] += seg
            hold[act] -= seg
            remaining = remaining - seg

            switch = alive[act] & (hold[act] <= 0)
            if np.any(switch):
                idx = act[switch]
                j[idx] = (rng.random(idx.size)[:, None] < cdf[j[idx]]).argmax(axis=1)
                hold[idx] = _holding(rng, rates, j[idx])

            keep = alive[act] & (remaining > 1e-15)
            act, remaining = act[keep], remaining[keep]

        censored = alive & (t >= cfg.t_max * (1 - 1e-12))
        alive[censored] = False

    outcomes = np.zeros((4, n_states))
    np.add.at(outcomes, (outcome, j), 1.0)
    payout_sum = np.bincount(j, weights=payout, minlength=n_states).astype(float)
    payout_sq = np.bincount(j, weights=payout**2, minlength=n_states).astype(float)
    occ_sum = occ_sq = None
    if occupation is not None:
        occ_sum = occupation.sum(axis=0)
        occ_sq = (occupation**2).sum(axis=0)
    return ChunkTally(n, outcomes, payout_sum, payout_sq, float(np.sum(payout**2)), occ_sum, occ_sq)


def simulate(
    model: MapModel,
    om: OmegaFn,
    cfg: PathConfig,
    scenario: Scenario,
    x0: float,
    starts: List[int],
    max_workers: int | None = None,
) -> List[ChunkTally]:
    """
    Run cfg.n_paths paths from x0 for every starting state in `starts`, in fixed chunks whose
    random streams depend only on (seed, state, chunk index).

    Returns:
        List[ChunkTally]: One reduced tally per starting state, in the order of `starts`.
    """
    sizes = cfg.chunks()
    items = [(s, i, size) for s in starts for i, size in enumerate(sizes)]
    tallies = run_batch(run_chunk, items, ChunkJob(model, om, cfg, scenario, float(x0)), max_workers, desc="MC chunks")
    reduced = []
    for pos in range(len(starts)):
        total = tallies[pos * len(sizes)]
        for tally in tallies[pos * len(sizes) + 1 : (pos + 1) * len(sizes)]:
            total = total + tally
        reduced.append(total)
        censored = int(total.outcomes[CENSORED].sum())
        if censored > 0.01 * total.n:
            logger.warning(f"{censored} of {total.n} paths from state {starts[pos]} were censored at t_max = {cfg.t_max}")
    return reduced
