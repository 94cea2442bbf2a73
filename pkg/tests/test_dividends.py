import numpy as np
import pytest
from omegamap.errors import ValidationError
from omegamap.model import ConstantOmega
from omegamap.scale_classic import w_q, w_q_prime
from omegamap.dividends import DividendQuery, barrier_sweep, dividend_value, dividend_value_grid

H = 0.01


def test_brownian_barrier_value(bm):
    delta, c = 0.1, 2.0
    r = np.sqrt(2 * delta)
    query = DividendQuery(bm, ConstantOmega(0.0), c, 0.0, delta, 1.0)
    value = dividend_value(query, H)
    assert value[0, 0] == pytest.approx(np.sinh(r) / (r * np.cosh(r * c)), rel=1e-7)


def test_lump_sum_above_barrier(bm):
    delta, c = 0.1, 2.0
    r = np.sqrt(2 * delta)
    query = DividendQuery(bm, ConstantOmega(0.0), c, 0.0, delta, 3.0)
    value = dividend_value(query, H)
    assert value[0, 0] == pytest.approx(1.0 + np.tanh(r * c) / r, rel=1e-7)


def test_constant_omega_matches_classic(fig3):
    model = fig3[0]
    om = ConstantOmega(0.1, 2)
    d, delta, c = 1.0, 0.05, 3.0
    xs = np.array([-0.5, 0.0, 1.5, 3.0])
    grid = dividend_value_grid(DividendQuery(model, om, c, d, delta, 0.0), xs, H)
    w_c_prime = w_q_prime(model, 0.15, c + d)
    expected = np.stack([w_q(model, 0.15, x + d) @ np.linalg.inv(w_c_prime) for x in xs])
    np.testing.assert_allclose(grid, expected, rtol=1e-6, atol=1e-10)


def test_value_is_nonnegative_and_increasing(omega_model):
    model, om, options = omega_model
    xs = np.array([-4.0, -2.0, 0.0, 1.0, 2.0])
    grid = dividend_value_grid(DividendQuery(model, om, 2.0, om.d, options.delta, 0.0), xs, H)
    assert np.all(grid >= -1e-10)
    rows = grid.sum(axis=2)
    assert np.all(np.diff(rows, axis=0) > 0)


def test_invalid_queries(fig2):
    model, om, _ = fig2
    with pytest.raises(ValidationError) as info:
        DividendQuery(model, om, 0.0, -1.0, 0.0, -2.0)
    assert info.value.code == "invalid_dividend_query"
    assert len(info.value.errors) == 4
    query = DividendQuery(model, om, 2.0, 1.0, 0.1, 0.5)
    with pytest.raises(ValidationError):
        dividend_value_grid(query, np.array([-1.0]))


def test_sweep_matches_single_values(fig2):
    model, om, _ = fig2
    c_grid = np.array([0.5, 1.0, 2.0, 3.0])
    sweep = barrier_sweep(model, om, 1.0, 0.1, 0.5, c_grid, H)
    assert list(sweep.table.columns) == ["c", "state_1", "state_2"]
    for c, row in zip(c_grid, sweep.table.itertuples(index=False)):
        single = dividend_value(DividendQuery(model, om, c, 1.0, 0.1, 0.5), H).sum(axis=1)
        np.testing.assert_allclose([row.state_1, row.state_2], single, rtol=1e-10)
    for state in ("state_1", "state_2"):
        assert sweep.best_barrier[state] == c_grid[sweep.table[state].to_numpy().argmax()]


def test_sweep_rejects_unsorted_barriers(fig2):
    model, om, _ = fig2
    with pytest.raises(ValidationError) as info:
        barrier_sweep(model, om, 1.0, 0.1, 0.5, np.array([2.0, 1.0]), H)
    assert info.value.code == "invalid_sweep"


def test_branches_meet_at_barrier_with_unit_slope_above(fig2):
    model, om, _ = fig2
    c = 2.0
    query = DividendQuery(model, om, c, 1.0, 0.1, 0.0)
    below, at, above = dividend_value_grid(query, np.array([c - 1e-12, c, c + 0.5]), H)
    np.testing.assert_allclose(below, at, atol=1e-9)
    np.testing.assert_allclose(above - at, 0.5 * np.eye(2), atol=1e-12)


def test_heavier_discount_pays_less(fig2):
    model, om, _ = fig2
    xs = np.array([0.0, 1.0, 2.0])
    low = dividend_value_grid(DividendQuery(model, om, 2.0, 1.0, 0.05, 0.0), xs, H)
    high = dividend_value_grid(DividendQuery(model, om, 2.0, 1.0, 0.1, 0.0), xs, H)
    assert np.all(high <= low + 1e-12)
