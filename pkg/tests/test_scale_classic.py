import numpy as np
import pytest
from omegamap.errors import ValidationError
from omegamap.model import MapModel
from omegamap.scale_classic import (
    analytic_w2_zero_drift,
    check_killing_rate,
    constant_omega_w2,
    lambda_pair,
    lambda_relations,
    laplace_check,
    occupancy,
    w_q,
    w_q_prime,
    z_q,
    z_q_integral,
)


def test_scalar_brownian_scale_function(bm):
    q = 0.5
    xs = np.linspace(0.0, 3.0, 31)
    root = np.sqrt(2 * q)
    expected = 2 * np.sinh(root * xs) / root
    np.testing.assert_allclose(w_q(bm, q, xs)[:, 0, 0], expected, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(z_q(bm, q, xs)[:, 0, 0], 1 + q * 2 * (np.cosh(root * xs) - 1) / root**2, rtol=1e-11)


def test_drifted_brownian_scale_function():
    mu, q = 0.3, 0.2
    model = MapModel(np.array([[0.0]]), np.array([1.0]), np.array([mu]))
    root = np.sqrt(mu**2 + 2 * q)
    xs = np.array([0.5, 1.0, 2.0])
    expected = (np.exp((root - mu) * xs) - np.exp(-(root + mu) * xs)) / root
    np.testing.assert_allclose(w_q(model, q, xs)[:, 0, 0], expected, rtol=1e-11)


def test_vanishes_below_zero(fig3):
    model = fig3[0]
    np.testing.assert_array_equal(w_q(model, 0.2, np.array([-1.0, -0.1])), 0.0)
    np.testing.assert_allclose(w_q(model, 0.2, 0.0), 0.0, atol=1e-14)
    np.testing.assert_allclose(z_q(model, 0.2, -1.0), np.eye(2), atol=1e-14)


def test_derivative_at_zero(fig3):
    model = fig3[0]
    np.testing.assert_allclose(w_q_prime(model, 0.2, 0.0), model.two_over_var, atol=1e-10)


def test_derivative_matches_difference_quotient(fig3):
    model, h = fig3[0], 1e-5
    fd = (w_q(model, 0.2, 1.0 + h) - w_q(model, 0.2, 1.0 - h)) / (2 * h)
    np.testing.assert_allclose(w_q_prime(model, 0.2, 1.0), fd, rtol=1e-7, atol=1e-9)


def test_closed_form_two_state(fig1):
    model, _, options = fig1
    xs = np.linspace(0.0, 10.0, 100)
    closed = analytic_w2_zero_drift(1.0, 1.2, 0.05, 0.1, options.q, xs)
    np.testing.assert_allclose(w_q(model, options.q, xs), closed, atol=1e-8)


def test_closed_form_derivative(fig1):
    model, _, options = fig1
    xs = np.array([0.0, 1.0, 4.0])
    closed = analytic_w2_zero_drift(1.0, 1.2, 0.05, 0.1, options.q, xs, derivative=True)
    np.testing.assert_allclose(w_q_prime(model, options.q, xs), closed, atol=1e-8)


def test_constant_omega_closed_form_reduces(fig1):
    xs = np.linspace(0.0, 4.0, 9)
    np.testing.assert_allclose(
        constant_omega_w2(1.0, 1.2, 0.05, 0.1, 0.3, 0.3, xs),
        analytic_w2_zero_drift(1.0, 1.2, 0.05, 0.1, 0.3, xs),
        rtol=1e-12,
    )
    with pytest.raises(ValidationError):
        constant_omega_w2(1.0, 1.2, 0.05, 0.1, 0.0, 0.0, xs)


def test_lambda_relations(random_models):
    for model in random_models:
        for q in (0.0, 0.4):
            assert lambda_relations(lambda_pair(model, q), model).max_residual < 1e-8


def test_lambda_signs(fig3):
    pair = lambda_pair(fig3[0], 0.3)
    assert np.all(np.linalg.eigvals(-pair.lam_plus).real > 0)
    assert np.all(np.linalg.eigvals(pair.lam_minus).real < 0)


def test_laplace_transform(fig1):
    model, _, options = fig1
    growth = float(np.max(-np.linalg.eigvals(lambda_pair(model, options.q).lam_plus).real))
    assert laplace_check(model, options.q, growth + 1.0) < 1e-7
    with pytest.raises(ValidationError):
        laplace_check(model, options.q, growth / 2)


def test_zero_rate_needs_drift(fig1, fig3):
    with pytest.raises(ValidationError) as info:
        check_killing_rate(fig1[0], 0.0)
    assert info.value.code == "zero_drift_unkilled"
    check_killing_rate(fig3[0], 0.0)
    with pytest.raises(ValidationError):
        check_killing_rate(fig3[0], -0.1)


def test_occupancy_triple(fig3):
    model = fig3[0]
    triple = occupancy(model, 0.2)
    pair = lambda_pair(model, 0.2)
    np.testing.assert_array_equal(triple.l_mat, pair.xi)
    np.testing.assert_array_equal(triple.lam_gen, pair.lam_plus)
    np.testing.assert_allclose(triple.l_mat @ triple.r_mat, triple.lam_gen @ triple.l_mat, atol=1e-10)


def test_integral_matches_quadrature(fig3):
    model = fig3[0]
    xs = np.linspace(0.0, 2.0, 2001)
    vals = w_q(model, 0.2, xs)
    trapezoid = np.trapz(vals, xs, axis=0)
    np.testing.assert_allclose(z_q_integral(model, 0.2, 2.0), trapezoid, rtol=1e-6)
