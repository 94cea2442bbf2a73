import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Tuple
import numpy as np
from humanfriendly import format_timespan
from tabulate import tabulate
from ..errors import NumericalError, OmegaMapError
from ..fluctuation import exit_matrices, killing_probability
from ..model import AffineBandOmega, MatrixGrid, StepOmega
from ..scale_classic import analytic_w2_zero_drift, lambda_pair, lambda_relations, laplace_check, w_q
from ..scale_omega import (
    VolterraProblem,
    closed_step_omega_w,
    kernel_shift,
    omega_model_ode_g,
    omega_w,
    omega_z,
    step_constants,
    step_omega_w,
    volterra_residual,
    volterra_solve,
)
from .emit import emit_json
from .verbs import Context

logger = logging.getLogger(__name__)

CHECK_SPAN = 2.0
CHECK_STEP = 0.02
CHECK_RATE = 0.5


class Measure(NamedTuple):
    value: float
    tolerance: float
    at_least: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.value >= self.tolerance) if self.at_least else bool(self.value <= self.tolerance)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measure: Measure | None
    seconds: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.measure is not None and self.measure.passed


Check = Callable[[Context], Measure]


def _rel_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / (1.0 + np.abs(b).max()))


def _rate(ctx: Context) -> float:
    return float(ctx.options.q) if ctx.options.q is not None else CHECK_RATE


def _origin(ctx: Context) -> float:
    # jumps of omega land on even nodes of every check grid
    if isinstance(ctx.om, AffineBandOmega):
        return -float(ctx.om.d)
    if isinstance(ctx.om, StepOmega):
        return float(ctx.om.levels[0]) - 1.0
    return 0.0


def check_lambda_relations(ctx: Context) -> Measure:
    """
    Residual of the quadratic matrix equations solved by Lambda^+ and Lambda^-.

    Args:
        ctx (Context): Loaded configuration; the rate is --q or CHECK_RATE.

    Returns:
        Measure: Largest residual, bounded by 1e-8.
    """
    return Measure(lambda_relations(lambda_pair(ctx.model, _rate(ctx)), ctx.model).max_residual, 1e-8)


def check_laplace(ctx: Context) -> Measure:
    """
    Gap between the numerical Laplace transform of W^(q) and its closed form.

    Args:
        ctx (Context): Loaded configuration.

    Returns:
        Measure: Largest entrywise gap, bounded by 1e-7.
    """
    q = _rate(ctx)
    growth = float(np.max(-np.linalg.eigvals(lambda_pair(ctx.model, q).lam_plus).real))
    return Measure(laplace_check(ctx.model, q, growth + 1.0), 1e-7)


def check_analytic_two_state(ctx: Context) -> Measure:
    """
    Distance between W^(q) and the two-state zero-drift closed form on [0, 10].

    Args:
        ctx (Context): A two-state configuration with zero drifts.

    Returns:
        Measure: Largest entrywise gap, bounded by 1e-8.
    """
    q, m = _rate(ctx), ctx.model
    xs = np.linspace(0.0, 10.0, 100)
    closed = analytic_w2_zero_drift(m.sigma[0], m.sigma[1], -m.q_gen[0, 0], -m.q_gen[1, 1], q, xs)
    return Measure(float(np.abs(closed - w_q(m, q, xs)).max()), 1e-8)


def _residual_at(ctx: Context, h: float) -> float:
    """Max Volterra residual of the omega-scale W on a CHECK_SPAN window at step h."""
    shift = kernel_shift(ctx.model, ctx.om, 0.0)
    n = int(round(CHECK_SPAN / h)) + 1
    kernel = MatrixGrid(0.0, h, w_q(ctx.model, shift, h * np.arange(n)))
    problem = VolterraProblem(kernel, ctx.om, MatrixGrid(_origin(ctx), h, kernel.values), offset=-shift)
    return float(volterra_residual(problem, volterra_solve(problem)).max())


def check_grid_convergence(ctx: Context) -> Measure:
    """
    Residual ratio between steps h and h/2; a second-order quadrature gives about 4.

    Args:
        ctx (Context): Loaded configuration.

    Returns:
        Measure: The ratio, required to be at least 3.5.
    """
    coarse, fine = _residual_at(ctx, CHECK_STEP), _residual_at(ctx, CHECK_STEP / 2)
    return Measure(coarse / fine if fine > 0 else np.inf, 3.5, at_least=True)


def check_shift_invariance(ctx: Context) -> Measure:
    """
    Relative change of W^(omega) when the kernel shift grows by one.

    Args:
        ctx (Context): Loaded configuration.

    Returns:
        Measure: Relative gap, bounded by 1e-6.
    """
    base, y = kernel_shift(ctx.model, ctx.om, 0.0), _origin(ctx)
    grids = [
        omega_w(ctx.model, ctx.om, y, y + CHECK_SPAN, CHECK_STEP, shift=base + extra, extrapolate=True).values
        for extra in (0.0, 1.0)
    ]
    return Measure(_rel_gap(grids[1], grids[0]), 1e-6)


def _exit_grids(ctx: Context) -> Tuple[MatrixGrid, MatrixGrid]:
    o = ctx.options
    return omega_w(ctx.model, ctx.om, o.d, o.c, ctx.h), omega_z(ctx.model, ctx.om, o.d, o.c, ctx.h)


def check_exit_bounds(ctx: Context) -> Measure:
    """
    Largest violation of A >= 0, B >= 0 and A 1 + B 1 <= 1.

    Args:
        ctx (Context): Configuration with levels d <= x <= c.

    Returns:
        Measure: The violation, bounded by 1e-6.
    """
    o = ctx.options
    up, down = exit_matrices(*_exit_grids(ctx), o.x, o.c)
    negative = max(0.0, -float(up.min()), -float(down.min()))
    excess = max(0.0, float((up + down).sum(axis=1).max()) - 1.0)
    return Measure(max(negative, excess), 1e-6)


def check_multiplicativity(ctx: Context) -> Measure:
    """
    Failure of A(x, c) = A(x, m) A(m, c) at the midpoint m of x and c.

    Args:
        ctx (Context): Configuration with levels d <= x <= c.

    Returns:
        Measure: Largest entrywise gap, bounded by 1e-7.
    """
    o = ctx.options
    w, z = _exit_grids(ctx)
    mid = 0.5 * (o.x + o.c)
    direct, _ = exit_matrices(w, z, o.x, o.c)
    first, _ = exit_matrices(w, z, o.x, mid)
    second, _ = exit_matrices(w, z, mid, o.c)
    return Measure(float(np.abs(first @ second - direct).max()), 1e-7)


def check_conservation(ctx: Context) -> Measure:
    """
    Probability defect of exit up, exit down and omega-killing on (d, c).

    Args:
        ctx (Context): Configuration with levels d <= x <= c.

    Returns:
        Measure: Largest row defect, bounded by 1e-3.
    """
    o = ctx.options
    result = killing_probability(ctx.model, ctx.om, o.d, o.x, o.c, ctx.h, max_workers=ctx.threads)
    return Measure(float(np.abs(result.defect).max()), 1e-3)


def check_step_closed_form(ctx: Context) -> Measure:
    """
    Relative gap between the step recursion and the closed form above the step.

    Args:
        ctx (Context): Configuration with a one-level StepOmega.

    Returns:
        Measure: Relative gap, bounded by 1e-6.
    """
    om = ctx.om
    p0, p1, x1 = float(om.rates[0]), float(om.rates[1]), float(om.levels[0])
    xs = x1 + np.array([0.5, 1.0, 2.0])
    recursion = step_omega_w(ctx.model, om, xs, 0.0)
    closed = closed_step_omega_w(ctx.model, p0, p1, x1, xs, 0.0)
    return Measure(_rel_gap(recursion, closed), 1e-6)


def check_step_identities(ctx: Context) -> Measure:
    """
    Residual of the identities linking the step constants.

    Args:
        ctx (Context): Configuration with a one-level StepOmega.

    Returns:
        Measure: Largest residual, bounded by 1e-10.
    """
    consts = step_constants(ctx.model, float(ctx.om.rates[0]), float(ctx.om.rates[1]))
    return Measure(max(consts.identity_residuals.values()), 1e-10)


def check_sandwich(ctx: Context) -> Measure:
    """
    Largest violation of the entrywise sandwich above the step.

    Each entry of W^(omega)(x, 0) must lie between the matching entries of W^(p0)(x) and W^(p1)(x),
    whichever order they come in; off-diagonal entries may be negative.

    Args:
        ctx (Context): Configuration with a one-level StepOmega.

    Returns:
        Measure: Violation scaled by the size of W^(omega), bounded by 1e-9.
    """
    om = ctx.om
    xs = float(om.levels[0]) + np.array([1.0, 2.0, 4.0])
    w = step_omega_w(ctx.model, om, xs, 0.0)
    w0, w1 = (w_q(ctx.model, float(p), xs) for p in om.rates)
    lower, upper = np.minimum(w0, w1), np.maximum(w0, w1)
    scale = 1.0 + np.abs(w).max()
    violation = max(float(np.maximum(lower - w, 0.0).max()), float(np.maximum(w - upper, 0.0).max()))
    return Measure(violation / scale, 1e-9)


def check_ode_route(ctx: Context) -> Measure:
    """
    Relative gap between the ODE route and the Volterra solve for a band omega.

    Args:
        ctx (Context): Configuration with an AffineBandOmega.

    Returns:
        Measure: Relative gap, bounded by 1e-3.
    """
    om, delta = ctx.om, float(ctx.options.delta or 0.0)
    h, span = 0.005, 5.0
    ode = omega_model_ode_g(ctx.model, om.gamma0, om.gamma1, om.d, delta, om.d + span, h)
    vol = omega_w(ctx.model, om, -om.d, span, h, delta, extrapolate=True)
    n = min(len(ode), len(vol))
    return Measure(_rel_gap(ode.values[:n], vol.values[:n]), 1e-3)


def suite(ctx: Context) -> List[Tuple[str, Check]]:
    """The checks that apply to the loaded configuration."""
    m, om, o = ctx.model, ctx.om, ctx.options
    checks: List[Tuple[str, Check]] = [
        ("lambda relations", check_lambda_relations),
        ("laplace transform of W^(q)", check_laplace),
    ]
    if m.n_states == 2 and np.all(m.mu == 0):
        checks.append(("two-state closed form", check_analytic_two_state))
    checks += [
        ("grid convergence order", check_grid_convergence),
        ("kernel shift invariance", check_shift_invariance),
    ]
    if None not in (o.d, o.x, o.c) and o.d <= o.x <= o.c:
        checks += [
            ("exit matrices bounded", check_exit_bounds),
            ("exit multiplicativity", check_multiplicativity),
            ("probability conservation", check_conservation),
        ]
    if isinstance(om, StepOmega) and len(om.levels) == 1:
        checks += [
            ("step recursion vs closed form", check_step_closed_form),
            ("step constant identities", check_step_identities),
            ("step sandwich", check_sandwich),
        ]
    if isinstance(om, AffineBandOmega):
        checks.append(("ODE vs Volterra", check_ode_route))
    return checks


def run_checks(ctx: Context) -> List[CheckResult]:
    results = []
    for name, check in suite(ctx):
        start = time.perf_counter()
        try:
            measure, note = check(ctx), ""
        except OmegaMapError as e:
            measure, note = None, e.code
        seconds = time.perf_counter() - start
        result = CheckResult(name, measure, seconds, note)
        logger.info(f"{name}: {'pass' if result.passed else 'FAIL'} in {format_timespan(seconds)}")
        results.append(result)
    return results


def render(results: List[CheckResult]) -> str:
    rows = []
    for r in results:
        if r.measure is None:
            value, bound = "-", "-"
        else:
            value = f"{r.measure.value:.3g}"
            bound = f"{'>=' if r.measure.at_least else '<='} {r.measure.tolerance:.3g}"
        status = "pass" if r.passed else f"FAIL {r.note}".strip()
        rows.append([r.name, value, bound, status, format_timespan(r.seconds)])
    return tabulate(rows, headers=["check", "value", "bound", "status", "time"])


def results_doc(results: List[CheckResult]) -> Dict[str, Any]:
    return {
        "checks": [
            {
                "name": r.name,
                "value": None if r.measure is None else r.measure.value,
                "tolerance": None if r.measure is None else r.measure.tolerance,
                "at_least": None if r.measure is None else r.measure.at_least,
                "passed": r.passed,
                "seconds": r.seconds,
                "error": r.note or None,
            }
            for r in results
        ],
        "passed": all(r.passed for r in results),
    }


def verify(ctx: Context, sink: str | Path | None = None) -> List[CheckResult]:
    """
    Run the invariant suite for the configuration and print the pass/fail table.

    Args:
        ctx (Context): Loaded configuration and options.
        sink (str | Path | None): Where to write the results as JSON. Defaults to None (no file).

    Returns:
        List[CheckResult]: One result per check.

    Raises:
        NumericalError: When any check fails.
    """
    results = run_checks(ctx)
    print(render(results))
    if sink is not None:
        emit_json(results_doc(results), sink)
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise NumericalError(
            f"{len(failed)} of {len(results)} checks failed", code="verify_failed", details={"failed": failed}
        )
    return results
