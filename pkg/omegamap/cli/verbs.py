import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Literal, Tuple
import numpy as np
import pandas as pd
from ..errors import ValidationError
from ..dividends import DividendQuery, barrier_sweep, dividend_value
from ..fluctuation import Window, resolvent, two_sided_exit
from ..mc_oracle import PathConfig, simulate_dividends, simulate_exit, simulate_one_sided_down, simulate_resolvent
from ..model import AffineBandOmega, GridSpec, MapModel, MatrixGrid, OmegaFn, RunOptions, StepOmega
from ..scale_classic import w_q
from ..scale_omega import omega_model_ode_g, omega_scale_set, omega_w
from ..scale_omega.omega_scale import DEFAULT_STEP
from ..utils import worker_count

logger = logging.getLogger(__name__)

SimulateTarget = Literal["exit", "down", "dividends", "resolvent"]
SIMULATE_TARGETS = ("exit", "down", "dividends", "resolvent")


@dataclass(frozen=True, eq=False)
class Context:
    """Everything a verb needs: the loaded config, the merged run options and the CLI switches."""

    model: MapModel
    om: OmegaFn
    options: RunOptions
    step: float | None = None
    extrapolate: bool = False
    threads: int | None = None
    target: SimulateTarget = "exit"
    sweep: GridSpec | None = None

    @property
    def h(self) -> float:
        if self.step is not None:
            return self.step
        return self.options.grid.h if self.options.grid is not None else DEFAULT_STEP


@dataclass(frozen=True, eq=False)
class VerbOutput:
    """A verb's result: grids or a table go out as CSV, anything else as JSON."""

    grids: Dict[str, MatrixGrid] | MatrixGrid | None = None
    table: pd.DataFrame | None = None
    doc: Dict[str, Any] = field(default_factory=dict)


def require(options: RunOptions, *names: str) -> None:
    missing = [name for name in names if getattr(options, name) is None]
    if missing:
        raise ValidationError(
            [f"option '{name}' is required (flag --{name.replace('_', '-')} or config key)" for name in missing],
            code="missing_option",
        )


def _delta(options: RunOptions) -> float:
    return float(options.delta) if options.delta is not None else 0.0


def floor_level(om: OmegaFn) -> Tuple[float, float]:
    """
    A level below which omega is constant, with that constant, for windows with an infinite
    lower end.
    """
    candidates = [0.0]
    if isinstance(om, StepOmega):
        candidates.insert(0, float(om.levels[0]))
    elif isinstance(om, AffineBandOmega):
        candidates.insert(0, -float(om.d))
    for level in candidates:
        beta = om.constant_below(level)
        if beta is not None:
            return level, beta
    raise ValidationError(
        f"omega of kind '{om.kind}' is not constant on any half-line below; give --d for a finite window",
        code="omega_not_constant_below",
    )


def run_scale(ctx: Context) -> VerbOutput:
    """W^(q) on the configured grid."""
    require(ctx.options, "q", "grid")
    xs = ctx.options.grid.nodes()
    grid = MatrixGrid(xs[0], ctx.options.grid.h, w_q(ctx.model, ctx.options.q, xs))
    return VerbOutput(grids=grid, doc={"q": ctx.options.q})


def run_omega_scale(ctx: Context) -> VerbOutput:
    """
    W, Z and W' of omega + delta over the configured grid, with y = x_min. For a single-step
    omega the classic W^(p0) and W^(p1) are added for comparison.
    """
    require(ctx.options, "grid")
    g, delta = ctx.options.grid, _delta(ctx.options)
    scale_set = omega_scale_set(ctx.model, ctx.om, g.x_min, g.x_max, g.h, delta, extrapolate=ctx.extrapolate)
    grids: Dict[str, MatrixGrid] = {}
    if isinstance(ctx.om, StepOmega) and len(ctx.om.levels) == 1:
        t = scale_set.xs - g.x_min
        for name, rate in (("W_p0", ctx.om.rates[0]), ("W_p1", ctx.om.rates[1])):
            grids[name] = MatrixGrid(g.x_min, g.h, w_q(ctx.model, float(rate) + delta, t))
    grids.update({"W": scale_set.w_omega, "Z": scale_set.z_omega, "Wp": scale_set.w_omega_prime})
    return VerbOutput(grids=grids, doc={"y": g.x_min, "delta": delta})


def run_exit(ctx: Context) -> VerbOutput:
    require(ctx.options, "d", "x", "c")
    o = ctx.options
    result = two_sided_exit(ctx.model, ctx.om, o.d, o.x, o.c, ctx.h, extrapolate=ctx.extrapolate)
    return VerbOutput(
        doc={
            "d": o.d,
            "x": o.x,
            "c": o.c,
            "up": result.up,
            "down": result.down,
            "up_row_sums": result.up.sum(axis=1),
            "down_row_sums": result.down.sum(axis=1),
            "survival_defect": 1.0 - result.row_sums(),
        }
    )


def run_resolvent(ctx: Context) -> VerbOutput:
    """
    Resolvent density from --x on the y grid; --d and --c bound the window and an absent bound
    is infinite.
    """
    require(ctx.options, "x", "grid")
    o = ctx.options
    window = Window(o.d, o.c)
    level, beta = (0.0, None) if o.d is not None else floor_level(ctx.om)
    result = resolvent(
        ctx.model, ctx.om, o.x, o.grid, window, beta, level, ctx.h,
        extrapolate=ctx.extrapolate, max_workers=ctx.threads,
    )
    return VerbOutput(grids=result.density, doc={"x": o.x, "window": [o.d, o.c], "kind": window.kind})


def run_dividends(ctx: Context) -> VerbOutput:
    """Barrier-strategy value at (x, c); with --sweep, the row sums over a range of barriers."""
    require(ctx.options, "d", "x", "delta")
    o = ctx.options
    if ctx.sweep is not None:
        result = barrier_sweep(
            ctx.model, ctx.om, o.d, o.delta, o.x, ctx.sweep.nodes(), ctx.h, extrapolate=ctx.extrapolate
        )
        best = {k: float(v) for k, v in result.best_barrier.items()}
        return VerbOutput(table=result.table, doc={"best_barrier": best})
    require(o, "c")
    value = dividend_value(DividendQuery(ctx.model, ctx.om, o.c, o.d, o.delta, o.x), ctx.h, extrapolate=ctx.extrapolate)
    return VerbOutput(doc={"c": o.c, "d": o.d, "delta": o.delta, "x": o.x, "value": value, "row_sums": value.sum(axis=1)})


def run_omega_model(ctx: Context) -> VerbOutput:
    """
    The Omega-model scale matrix on the configured grid by the ODE route (G) next to the
    Volterra route (W), both indexed by x = z - d.
    """
    if not isinstance(ctx.om, AffineBandOmega):
        raise ValidationError(f"omega-model needs an affine_band omega, config has '{ctx.om.kind}'", code="wrong_omega_kind")
    require(ctx.options, "grid")
    om, g, delta = ctx.om, ctx.options.grid, _delta(ctx.options)
    ode = omega_model_ode_g(ctx.model, om.gamma0, om.gamma1, om.d, delta, g.x_max + om.d, g.h)
    vol = omega_w(ctx.model, om, -om.d, g.x_max, g.h, delta, extrapolate=ctx.extrapolate)
    n = min(len(ode), len(vol))
    grids = {
        "G": MatrixGrid(-om.d, g.h, ode.values[:n]),
        "W": MatrixGrid(-om.d, g.h, vol.values[:n]),
    }
    scale = 1.0 + np.abs(grids["W"].values).max()
    gap = float(np.abs(grids["G"].values - grids["W"].values).max() / scale)
    return VerbOutput(grids=grids, doc={"delta": delta, "relative_gap": gap})


def _estimate_doc(est) -> Dict[str, Any]:
    return {
        "mean": est.mean,
        "std_err": est.std_err,
        "row_mean": est.row_mean,
        "row_std_err": est.row_std_err,
        "n_paths": est.n_paths,
        "n_censored": est.n_censored,
    }


def run_simulate(ctx: Context) -> VerbOutput:
    """Monte Carlo estimate of one of the analytic quantities, from every starting state."""
    o = ctx.options
    cfg = PathConfig(dt=o.dt, t_max=o.t_max, n_paths=o.paths, seed=o.seed or 0)
    workers = worker_count(ctx.threads)
    doc: Dict[str, Any] = {"target": ctx.target, "paths": o.paths, "dt": o.dt, "seed": cfg.seed}
    if ctx.target == "exit":
        require(o, "d", "x", "c")
        up, down = simulate_exit(ctx.model, ctx.om, o.d, o.x, o.c, None, cfg, workers)
        doc.update(up=_estimate_doc(up), down=_estimate_doc(down))
    elif ctx.target == "down":
        require(o, "x")
        d = o.d if o.d is not None else 0.0
        doc["down"] = _estimate_doc(simulate_one_sided_down(ctx.model, ctx.om, o.x, None, cfg, d, workers))
    elif ctx.target == "dividends":
        require(o, "d", "x", "c", "delta")
        est = simulate_dividends(ctx.model, ctx.om, o.d, o.x, o.c, None, o.delta, cfg, workers)
        doc["value"] = _estimate_doc(est)
    elif ctx.target == "resolvent":
        require(o, "x", "grid")
        d = o.d if o.d is not None else -np.inf
        c = o.c if o.c is not None else np.inf
        est = simulate_resolvent(ctx.model, ctx.om, d, o.x, c, None, o.grid.nodes(), cfg, workers)
        doc["resolvent"] = {
            "edges": est.edges,
            "density": est.density,
            "std_err": est.std_err,
            "reliable": est.reliable,
            "n_paths": est.n_paths,
            "n_censored": est.n_censored,
        }
    else:
        raise ValidationError(
            f"Invalid target: {ctx.target}. Valid targets are: {', '.join(SIMULATE_TARGETS)}", code="invalid_target"
        )
    return VerbOutput(doc=doc)


VERBS: Dict[str, Callable[[Context], VerbOutput]] = {
    "scale": run_scale,
    "omega-scale": run_omega_scale,
    "exit": run_exit,
    "resolvent": run_resolvent,
    "dividends": run_dividends,
    "omega-model": run_omega_model,
    "simulate": run_simulate,
}
