import numpy as np
import pytest
from omegamap.errors import ValidationError
from omegamap.model import ConstantOmega, MatrixGrid, PerStateOmega
from omegamap.scale_classic import constant_omega_w2, lambda_pair, w_q, z_q
from omegamap.matrix_engine import expm_stack
from omegamap.fluctuation import exit_matrices, two_sided_exit
from omegamap.scale_omega import (
    VolterraProblem,
    closed_step_omega_w,
    kernel_shift,
    omega_h,
    omega_model_ode_g,
    omega_scale_set,
    omega_w,
    omega_w_prime,
    omega_z,
    step_constants,
    step_omega_w,
    step_omega_z,
    volterra_residual,
    volterra_solve,
)

STEP_POINTS = np.array([5.0, 6.0, 8.0])


def _node_rel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-node max difference relative to the size of b at that node."""
    return np.abs(a - b).max(axis=(1, 2)) / np.abs(b).max(axis=(1, 2))


def test_kernel_shift_choices(fig1, fig2, fig3, omega_model):
    assert kernel_shift(fig1[0], fig1[1]) == pytest.approx(0.1)
    assert kernel_shift(fig2[0], fig2[1]) == pytest.approx(0.05)
    assert kernel_shift(fig3[0], fig3[1]) == pytest.approx(0.03)
    assert kernel_shift(omega_model[0], omega_model[1]) == 0.0
    assert kernel_shift(omega_model[0], omega_model[1], delta=0.04) == pytest.approx(0.04)


def test_constant_omega_gives_classic_scale_matrix(bm):
    om = ConstantOmega(1.0)
    grid = omega_w(bm, om, 0.0, 2.0, 0.01, shift=0.5, extrapolate=True)
    np.testing.assert_allclose(grid.values, w_q(bm, 1.0, grid.xs), rtol=1e-6, atol=1e-12)


def test_per_state_omega_matches_closed_form(fig2):
    model, om, _ = fig2
    grid = omega_w(model, om, 0.0, 6.0, 0.01, extrapolate=True)
    closed = constant_omega_w2(1.0, 1.2, 0.05, 0.1, 0.05, 0.25, grid.xs)
    assert _node_rel(grid.values[1:], closed[1:]).max() < 2e-4


def test_second_argument_shifts(fig2):
    model, om, _ = fig2
    a = omega_w(model, om, 0.0, 2.0, 0.01)
    b = omega_w(model, om, 1.0, 3.0, 0.01)
    # per-state omega does not depend on the level, so only x - y matters
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12, atol=1e-15)


def test_z_reproduces_classic(fig3):
    model = fig3[0]
    om = ConstantOmega(0.3, 2)
    grid = omega_z(model, om, 0.0, 2.0, 0.01, shift=0.1, extrapolate=True)
    np.testing.assert_allclose(grid.values, z_q(model, 0.3, grid.xs), rtol=1e-6, atol=1e-9)


def test_z_variants_share_row_sums(fig2):
    model, om, _ = fig2
    generator = omega_z(model, om, 0.0, 3.0, 0.01)
    identity = omega_z(model, om, 0.0, 3.0, 0.01, inhomogeneity="identity")
    np.testing.assert_allclose(generator.row_sums(), identity.row_sums(), rtol=1e-10)
    with pytest.raises(ValidationError):
        omega_z(model, om, 0.0, 1.0, 0.01, inhomogeneity="other")


def test_derivative(fig2):
    model, om, _ = fig2
    w = omega_w(model, om, 0.0, 2.0, 0.01)
    wp = omega_w_prime(w, model, om)
    np.testing.assert_allclose(wp.values[0], model.two_over_var, atol=1e-12)
    central = (w.values[2:] - w.values[:-2]) / 0.02
    np.testing.assert_allclose(wp.values[1:-1], central, rtol=2e-3, atol=2e-4)


def test_scale_set_is_consistent(fig2):
    model, om, _ = fig2
    scale_set = omega_scale_set(model, om, 0.0, 2.0, 0.01, delta=0.1)
    np.testing.assert_allclose(scale_set.w_omega.values, omega_w(model, om, 0.0, 2.0, 0.01, delta=0.1).values)
    np.testing.assert_allclose(scale_set.z_omega.values, omega_z(model, om, 0.0, 2.0, 0.01, delta=0.1).values)
    assert scale_set.xs[-1] == pytest.approx(2.0)


@pytest.mark.parametrize("extra", [0.1, 1.0, 5.0])
def test_kernel_shift_invariance(fig2, extra):
    model, om, _ = fig2
    base = kernel_shift(model, om)
    ref = omega_w(model, om, 0.0, 2.0, 0.01, shift=base, extrapolate=True)
    other = omega_w(model, om, 0.0, 2.0, 0.01, shift=base + extra, extrapolate=True)
    assert np.abs(other.values - ref.values).max() / np.abs(ref.values).max() < 1e-6


def test_picard_matches_forward(fig2):
    model, om, _ = fig2
    forward = omega_w(model, om, 0.0, 2.0, 0.01)
    picard = omega_w(model, om, 0.0, 2.0, 0.01, mode="picard")
    np.testing.assert_allclose(picard.values, forward.values, rtol=1e-10, atol=1e-13)


def _residual(model, om, y, h, span=2.0):
    shift = kernel_shift(model, om)
    n = int(round(span / h)) + 1
    kernel = MatrixGrid(0.0, h, w_q(model, shift, h * np.arange(n)))
    problem = VolterraProblem(kernel, om, MatrixGrid(y, h, kernel.values), offset=-shift)
    return volterra_residual(problem, volterra_solve(problem)).max()


@pytest.mark.parametrize("name,y", [("fig2", 0.0), ("fig3", 3.0), ("omega_model", -5.0)])
def test_residual_convergence_order(request, name, y):
    model, om, _ = request.getfixturevalue(name)
    ratio = _residual(model, om, y, 0.02) / _residual(model, om, y, 0.01)
    assert ratio >= 3.5


def test_residual_detects_wrong_solution(fig2):
    model, om, _ = fig2
    shift = kernel_shift(model, om)
    kernel = MatrixGrid(0.0, 0.01, w_q(model, shift, 0.01 * np.arange(101)))
    problem = VolterraProblem(kernel, om, MatrixGrid(0.0, 0.01, kernel.values), offset=-shift)
    good = volterra_solve(problem)
    bad = MatrixGrid(0.0, 0.01, good.values * 1.01)
    assert volterra_residual(problem, bad).max() > 100 * volterra_residual(problem, good).max()


def test_mismatched_grids_rejected(fig2):
    model, om, _ = fig2
    kernel = MatrixGrid(0.0, 0.01, w_q(model, 0.05, 0.01 * np.arange(5)))
    with pytest.raises(ValidationError):
        VolterraProblem(kernel, om, MatrixGrid(0.0, 0.01, np.zeros((10, 2, 2))))


def test_step_recursion_matches_closed_form(fig3):
    model = fig3[0]
    recursion = step_omega_w(model, fig3[1], STEP_POINTS, 0.0)
    closed = closed_step_omega_w(model, 0.25, 0.03, 4.0, STEP_POINTS, 0.0)
    assert _node_rel(recursion, closed).max() < 1e-6


def test_step_volterra_matches_closed_form(fig3):
    model, om, _ = fig3
    grid = omega_w(model, om, 0.0, 10.0, 0.01, extrapolate=True)
    volterra = np.stack([grid.at(x) for x in STEP_POINTS])
    closed = closed_step_omega_w(model, 0.25, 0.03, 4.0, STEP_POINTS, 0.0)
    assert _node_rel(volterra, closed).max() < 1e-4


def test_step_below_level_is_classic(fig3):
    model, om, _ = fig3
    xs = np.array([1.0, 3.5])
    np.testing.assert_allclose(step_omega_w(model, om, xs, 0.0), w_q(model, 0.25, xs), rtol=1e-12)
    np.testing.assert_allclose(step_omega_w(model, om, xs + 5.0, 5.0), w_q(model, 0.03, xs), rtol=1e-12)


def test_step_z_matches_volterra(fig3):
    model, om, _ = fig3
    grid = omega_z(model, om, 0.0, 6.0, 0.01, extrapolate=True)
    recursion = step_omega_z(model, om, STEP_POINTS[:2], 0.0)
    volterra = np.stack([grid.at(x) for x in STEP_POINTS[:2]])
    assert _node_rel(volterra, recursion).max() < 1e-4


def test_closed_form_is_smooth_at_step(fig3):
    model = fig3[0]
    eps = 1e-6
    closed = closed_step_omega_w(model, 0.25, 0.03, 4.0, np.array([4.0 + eps]), 0.0)[0]
    np.testing.assert_allclose(closed, w_q(model, 0.25, 4.0 + eps), rtol=1e-8)
    with pytest.raises(ValidationError) as info:
        closed_step_omega_w(model, 0.2, 0.2, 4.0, STEP_POINTS, 0.0)
    assert info.value.code == "degenerate_step"


def test_step_constants(fig3):
    consts = step_constants(fig3[0], 0.25, 0.03)
    assert max(consts.identity_residuals.values()) < 1e-10
    assert max(consts.sylvester_residuals.values()) < 1e-9
    assert consts.sylvester_gap < 1e-8


def test_step_sandwich(fig3):
    model, om, _ = fig3
    w = step_omega_w(model, om, STEP_POINTS, 0.0)
    w_low, w_high = w_q(model, 0.03, STEP_POINTS), w_q(model, 0.25, STEP_POINTS)
    # off-diagonal entries can be negative, where the order of the bounds flips
    tol = 1e-9 * np.abs(w).max()
    assert np.all(np.minimum(w_low, w_high) - tol <= w)
    assert np.all(w <= np.maximum(w_low, w_high) + tol)


def test_omega_h_constant_is_exponential(fig3):
    model = fig3[0]
    om = ConstantOmega(0.2, 2)
    grid = omega_h(model, om, 0.2, 3.0, 0.01)
    expected = expm_stack(-lambda_pair(model, 0.2).lam_plus, grid.xs)
    np.testing.assert_allclose(grid.values, expected, rtol=1e-12)


def test_omega_h_needs_constant_floor(fig3):
    model, om, _ = fig3
    omega_h(model, om, 0.25, 6.0, 0.01, level=4.0)
    with pytest.raises(ValidationError):
        omega_h(model, om, 0.03, 6.0, 0.01, level=4.0)
    with pytest.raises(ValidationError):
        omega_h(model, om, 0.25, 6.0, 0.01, level=5.0)


def test_ode_matches_volterra(omega_model):
    model, om, options = omega_model
    h, span = 0.005, 5.0
    ode = omega_model_ode_g(model, om.gamma0, om.gamma1, om.d, options.delta, om.d + span, h)
    volterra = omega_w(model, om, -om.d, span, h, options.delta, extrapolate=True)
    assert len(ode) == len(volterra)
    rel = np.abs(ode.values - volterra.values).max() / np.abs(volterra.values).max()
    assert rel < 1e-3


def test_ode_rejects_off_grid_band(omega_model):
    model, om, _ = omega_model
    with pytest.raises(ValidationError):
        omega_model_ode_g(model, om.gamma0, om.gamma1, 5.003, 0.0, 10.0, 0.01)


def test_more_killing_shrinks_exit_matrices(random_models):
    small, large = PerStateOmega([0.1, 0.2]), PerStateOmega([0.3, 0.25])
    for model in random_models:
        for x in (0.5, 1.0, 1.5):
            a_small, b_small = _exit_pair(model, small, x)
            a_large, b_large = _exit_pair(model, large, x)
            assert np.all(a_large <= a_small + 1e-10)
            assert np.all(b_large <= b_small + 1e-10)


def _exit_pair(model, om, x, c=2.0):
    w = omega_w(model, om, 0.0, c, 0.01, shift=0.1)
    z = omega_z(model, om, 0.0, c, 0.01, shift=0.1)
    return exit_matrices(w, z, x, c)


def test_omega_h_is_the_limit_of_exit_matrices(fig3):
    # with no lower barrier the upward exit H(x) H(c)^{-1} is the d -> -inf limit of W(x, d) W(c, d)^{-1}
    model, om, _ = fig3
    x, c = 5.0, 6.0
    h_grid = omega_h(model, om, 0.25, c, 0.01, level=4.0, extrapolate=True)
    one_sided = h_grid.at(x) @ np.linalg.inv(h_grid.at(c))
    up = two_sided_exit(model, om, -8.0, x, c, 0.01, extrapolate=True).up
    np.testing.assert_allclose(up, one_sided, atol=1e-4)
