import numpy as np
import pytest
import scipy.linalg
from omegamap.errors import ConditioningError, NumericalError
from omegamap.matrix_engine import (
    QuadraticMatrixProblem,
    expm,
    expm_integral,
    expm_stack,
    right_solve,
    safe_inv,
    safe_solve,
    solve_quadratic_stable,
    solve_sylvester,
    sylvester_residual,
)


def test_safe_solve():
    a = np.array([[4.0, 1.0], [2.0, 3.0]])
    b = np.array([1.0, 2.0])
    np.testing.assert_allclose(a @ safe_solve(a, b), b, atol=1e-14)
    np.testing.assert_allclose(safe_inv(a) @ a, np.eye(2), atol=1e-14)


def test_right_solve():
    a = np.array([[4.0, 1.0], [2.0, 3.0]])
    b = np.array([[1.0, 0.5], [0.0, 2.0]])
    np.testing.assert_allclose(right_solve(b, a) @ a, b, atol=1e-14)


@pytest.mark.parametrize("a", [np.zeros((2, 2)), np.diag([1.0, 1e-14]), np.array([[1.0, 2.0], [2.0, 4.0]])])
def test_refuses_singular(a):
    with pytest.raises(ConditioningError):
        safe_inv(a)


def test_sylvester_solution():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 3)) + 6 * np.eye(3)
    b = rng.normal(size=(2, 2)) - 6 * np.eye(2)
    c = rng.normal(size=(3, 2))
    x = solve_sylvester(a, b, c)
    assert sylvester_residual(a, b, c, x) < 1e-10
    np.testing.assert_allclose(x, scipy.linalg.solve_sylvester(a, -b, c), atol=1e-10)


def test_sylvester_shared_spectrum():
    with pytest.raises(ConditioningError, match="no unique solution"):
        solve_sylvester(np.eye(2), np.eye(2), np.ones((2, 2)))


def test_quadratic_scalar_brownian():
    q = 0.5
    x = solve_quadratic_stable(QuadraticMatrixProblem(np.array([[0.5]]), np.zeros((1, 1)), np.array([[-q]])))
    assert x[0, 0] == pytest.approx(-np.sqrt(2 * q), rel=1e-12)


def test_quadratic_two_state_residual(fig3):
    model = fig3[0]
    p = QuadraticMatrixProblem(model.var_half, -np.diag(model.mu), model.q_gen - 0.3 * np.eye(2))
    x = solve_quadratic_stable(p)
    assert p.residual(x) < 1e-10
    assert np.all(np.linalg.eigvals(x).real < 0)


def test_expm_matches_scipy():
    m = np.array([[-1.0, 0.4], [0.2, -0.7]])
    np.testing.assert_allclose(expm(m, 2.5), scipy.linalg.expm(2.5 * m), rtol=1e-13)
    stack = expm_stack(m, np.array([0.0, 1.0, 2.0]))
    assert stack.shape == (3, 2, 2)
    np.testing.assert_allclose(stack[0], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(stack[2], stack[1] @ stack[1], rtol=1e-12)
    assert expm_stack(m, np.array([])).shape == (0, 2, 2)


def test_expm_integral_of_singular_matrix():
    np.testing.assert_allclose(expm_integral(np.zeros((2, 2)), 3.0), 3.0 * np.eye(2), atol=1e-13)
    m = np.array([[-2.0]])
    xs = np.array([0.5, 1.0])
    np.testing.assert_allclose(expm_integral(m, xs)[:, 0, 0], (1 - np.exp(-2 * xs)) / 2, rtol=1e-12)


def test_expm_overflow():
    with pytest.raises(NumericalError):
        expm(np.array([[1000.0]]))


def test_expm_semigroup():
    m = np.array([[-0.9, 0.3, 0.6], [0.2, -0.5, 0.3], [0.0, 0.4, -0.4]])
    np.testing.assert_allclose(expm(m, 1.7), expm(m, 0.5) @ expm(m, 1.2), rtol=1e-10)
