import numpy as np
import pytest
from omegamap.errors import ValidationError
from omegamap.model import ConstantOmega
from omegamap.dividends import DividendQuery, dividend_value
from omegamap.fluctuation import one_sided_down, two_sided_exit
from omegamap.mc_oracle import (
    PathConfig,
    simulate_dividends,
    simulate_exit,
    simulate_one_sided_down,
    simulate_resolvent,
)

QUICK = PathConfig(dt=0.01, t_max=20.0, n_paths=2_000, seed=7)


def test_path_config_validation():
    with pytest.raises(ValidationError) as info:
        PathConfig(dt=0.0, t_max=-1.0, n_paths=0, seed=-1)
    assert len(info.value.errors) == 4
    assert PathConfig(n_paths=25_000).chunks() == [10_000, 10_000, 5_000]


def test_same_seed_same_estimate(bm):
    a = simulate_exit(bm, ConstantOmega(0.0), 0.0, 1.0, 2.0, None, QUICK, max_workers=1)
    b = simulate_exit(bm, ConstantOmega(0.0), 0.0, 1.0, 2.0, None, QUICK, max_workers=1)
    np.testing.assert_array_equal(a[0].mean, b[0].mean)
    np.testing.assert_array_equal(a[1].mean, b[1].mean)


def test_worker_count_does_not_change_estimate(bm):
    cfg = PathConfig(dt=0.01, t_max=20.0, n_paths=12_000, seed=3)
    one = simulate_exit(bm, ConstantOmega(0.0), 0.0, 1.0, 2.0, 0, cfg, max_workers=1)
    two = simulate_exit(bm, ConstantOmega(0.0), 0.0, 1.0, 2.0, 0, cfg, max_workers=2)
    np.testing.assert_array_equal(one[0].mean, two[0].mean)


def test_unkilled_brownian_exit(bm):
    up, down = simulate_exit(bm, ConstantOmega(0.0), 0.0, 1.0, 2.0, None, QUICK, max_workers=1)
    assert up.within(np.array([[0.5]]), n_se=4)
    assert down.within(np.array([[0.5]]), n_se=4)
    assert up.n_censored == 0


def test_unsimulated_rows_are_nan(fig2):
    model, om, _ = fig2
    up, _ = simulate_exit(model, om, 0.0, 1.0, 2.0, 1, QUICK, max_workers=1)
    assert np.all(np.isnan(up.mean[0]))
    assert not np.any(np.isnan(up.mean[1]))


def test_invalid_levels(fig2):
    model, om, _ = fig2
    with pytest.raises(ValidationError):
        simulate_exit(model, om, 0.0, 3.0, 2.0, None, QUICK)
    with pytest.raises(ValidationError):
        simulate_one_sided_down(model, om, -1.0, None, QUICK)
    with pytest.raises(ValidationError):
        simulate_dividends(model, om, 1.0, -2.0, 2.0, None, 0.1, QUICK)
    with pytest.raises(ValidationError) as info:
        simulate_resolvent(model, om, 0.0, 1.0, 2.0, None, np.array([0.5, 3.0]), QUICK)
    assert info.value.code == "invalid_bins"


@pytest.mark.slow
def test_exit_matches_scale_matrices(fig2):
    model, om, _ = fig2
    cfg = PathConfig(dt=1e-3, t_max=200.0, n_paths=20_000, seed=11)
    up, down = simulate_exit(model, om, 0.0, 2.0, 4.0, None, cfg)
    exact = two_sided_exit(model, om, 0.0, 2.0, 4.0, 0.01, extrapolate=True)
    assert up.within(exact.up, n_se=4)
    assert down.within(exact.down, n_se=4)


@pytest.mark.slow
def test_one_sided_down_brownian(bm):
    q = 0.5
    cfg = PathConfig(dt=1e-3, t_max=50.0, n_paths=20_000, seed=12)
    est = simulate_one_sided_down(bm, ConstantOmega(q), 1.0, 0, cfg)
    assert est.within(np.array([[np.exp(-np.sqrt(2 * q))]]), n_se=4)


@pytest.mark.slow
def test_brownian_dividends(bm):
    delta, c = 0.1, 2.0
    r = np.sqrt(2 * delta)
    cfg = PathConfig(dt=1e-3, t_max=200.0, n_paths=20_000, seed=13)
    est = simulate_dividends(bm, ConstantOmega(0.0), 0.0, 1.0, c, 0, delta, cfg)
    assert est.within(np.array([[np.sinh(r) / (r * np.cosh(r * c))]]), n_se=4, rows_only=True)


@pytest.mark.slow
def test_brownian_resolvent(bm):
    q, c, x = 0.5, 2.0, 0.5
    r = np.sqrt(2 * q)
    edges = np.linspace(0.0, 2.0, 5)
    cfg = PathConfig(dt=1e-3, t_max=50.0, n_paths=20_000, seed=14)
    est = simulate_resolvent(bm, ConstantOmega(q), 0.0, x, c, 0, edges, cfg)
    ys = np.linspace(0.0, 2.0, 401)
    lo, hi = np.minimum(x, ys), np.maximum(x, ys)
    density = 2 * np.sinh(r * lo) * np.sinh(r * (c - hi)) / (r * np.sinh(r * c))
    for i in range(4):
        inside = (ys >= edges[i]) & (ys <= edges[i + 1])
        average = np.trapz(density[inside], ys[inside]) / (edges[i + 1] - edges[i])
        assert abs(est.density[i, 0, 0] - average) <= 4 * est.std_err[i, 0, 0] + 5e-3
    assert est.reliable.all()


def test_rare_exit_keeps_a_positive_error(bm):
    q, c = 2.0, 8.0
    r = np.sqrt(2 * q)
    up, down = simulate_exit(bm, ConstantOmega(q), 0.0, 1.0, c, 0, QUICK, max_workers=1)
    assert up.std_err[0, 0] >= 1.0 / QUICK.n_paths
    assert up.row_std_err[0] > 0
    assert up.within(np.array([[np.sinh(r) / np.sinh(r * c)]]))
    assert down.within(np.array([[np.sinh(r * (c - 1.0)) / np.sinh(r * c)]]), n_se=4)


@pytest.mark.slow
def test_band_exit_matches_scale_matrices(omega_model):
    model, om, _ = omega_model
    cfg = PathConfig(dt=2e-3, t_max=50.0, n_paths=20_000, seed=15)
    up, down = simulate_exit(model, om, -5.0, -2.0, 1.0, None, cfg)
    exact = two_sided_exit(model, om, -5.0, -2.0, 1.0, 0.01, extrapolate=True)
    assert up.within(exact.up, n_se=4)
    assert down.within(exact.down, n_se=4)


@pytest.mark.slow
def test_band_one_sided_down(omega_model):
    model, om, _ = omega_model
    cfg = PathConfig(dt=2e-3, t_max=50.0, n_paths=20_000, seed=16)
    est = simulate_one_sided_down(model, om, -2.0, None, cfg, d=-5.0)
    exact = one_sided_down(model, om, -2.0, -5.0, 0.01)
    assert est.within(exact, n_se=4)


@pytest.mark.slow
def test_band_dividends(omega_model):
    model, om, options = omega_model
    cfg = PathConfig(dt=0.01, t_max=200.0, n_paths=10_000, seed=17)
    est = simulate_dividends(model, om, om.d, options.x, options.c, None, options.delta, cfg)
    exact = dividend_value(DividendQuery(model, om, options.c, om.d, options.delta, options.x), 0.01)
    assert est.within(exact, n_se=4, rows_only=True)
