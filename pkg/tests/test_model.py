import json
import numpy as np
import pytest
from omegamap.errors import ValidationError
from omegamap.model import (
    CANNED_NAMES,
    AffineBandOmega,
    ConstantOmega,
    GridSpec,
    MapModel,
    MatrixGrid,
    PerStateOmega,
    RunOptions,
    StepOmega,
    TabulatedOmega,
    load_canned,
    load_config,
    load_config_file,
    laplace_exponent,
    omega_eval,
    serialize,
)


def _doc(**changes):
    doc = {
        "n_states": 2,
        "Q": [[-0.05, 0.05], [0.1, -0.1]],
        "sigma": [1.0, 1.2],
        "mu": [0.0, 0.0],
    }
    doc.update(changes)
    return json.dumps(doc)


@pytest.mark.parametrize("name", CANNED_NAMES)
def test_canned_configs_load(name):
    model, om, options = load_canned(name)
    assert om.n_states == model.n_states
    assert options.grid is not None


def test_missing_omega_means_no_killing(fig1):
    _, om, options = fig1
    assert isinstance(om, ConstantOmega)
    assert om.beta == 0.0
    assert options.q == 0.05


def test_serialize_round_trip(fig2, omega_model):
    for model, om, options in (fig2, omega_model):
        again = load_config(serialize(model, om, options))
        assert again[0] == model
        assert again[1] == om
        assert again[2] == options


def test_all_violations_reported():
    text = _doc(Q=[[-0.05, 0.04], [0.1, -0.1]], sigma=[1.0, -1.2])
    with pytest.raises(ValidationError) as info:
        load_config(text)
    assert info.value.code == "invalid_config"
    assert len(info.value.errors) >= 2
    assert any("sums to" in e for e in info.value.errors)
    assert any("sigma[1]" in e for e in info.value.errors)


def test_reducible_generator_rejected():
    with pytest.raises(ValidationError, match="reducible"):
        MapModel(np.zeros((2, 2)), np.ones(2), np.zeros(2))


def test_schema_errors():
    doc = json.loads(_doc())
    del doc["mu"]
    doc["extra"] = 1
    with pytest.raises(ValidationError) as info:
        load_config(json.dumps(doc))
    assert info.value.code == "invalid_config"
    assert len(info.value.errors) == 2


def test_parse_error():
    with pytest.raises(ValidationError) as info:
        load_config("{not json")
    assert info.value.code == "parse_error"


def test_missing_file(tmp_path):
    with pytest.raises(ValidationError) as info:
        load_config_file(tmp_path / "absent.json")
    assert info.value.code == "config_not_found"
    assert info.value.to_dict()["error"] == "config_not_found"


def test_unknown_canned_name():
    with pytest.raises(ValidationError):
        load_canned("fig9")


def test_omega_shape_mismatch():
    text = _doc(omega={"kind": "per_state", "values": [0.1, 0.2, 0.3]})
    with pytest.raises(ValidationError, match="3 states"):
        load_config(text)


def test_negative_omega_rejected():
    text = _doc(omega={"kind": "step", "levels": [1.0], "values": [0.1, -0.2]})
    with pytest.raises(ValidationError) as info:
        load_config(text)
    assert any(">= 0" in e for e in info.value.errors)


def test_stationary_and_kappa(fig3):
    model = fig3[0]
    np.testing.assert_allclose(model.stationary(), [0.75, 0.25], atol=1e-12)
    assert model.kappa() == pytest.approx(0.05, abs=1e-12)


def test_step_sample_averages_on_jump():
    om = StepOmega([1.0], [0.2, 0.6])
    np.testing.assert_allclose(om.sample(np.array([0.0, 1.0, 2.0]))[:, 0], [0.2, 0.4, 0.6])
    np.testing.assert_allclose(om.values(np.array([1.0]))[:, 0], [0.2])


def test_affine_band_values_and_sample():
    om = AffineBandOmega(0.5, 0.1, 5.0)
    xs = np.array([-6.0, -5.0, -2.5, 0.0, 1.0])
    np.testing.assert_allclose(om.values(xs)[:, 0], [0.0, 0.5, 0.75, 1.0, 0.0])
    np.testing.assert_allclose(om.sample(xs)[:, 0], [0.0, 0.25, 0.75, 0.5, 0.0])
    assert om.bound_lambda == pytest.approx(1.0)
    assert om.constant_below(-5.0) == 0.0
    assert om.constant_below(-1.0) is None


def test_omega_eval():
    om = PerStateOmega([0.05, 0.25])
    assert omega_eval(om, 1, 3.0) == 0.05
    assert omega_eval(om, 2, 3.0) == 0.25
    for state in (0, 3):
        with pytest.raises(ValidationError) as info:
            omega_eval(om, state, 0.0)
        assert info.value.code == "state_out_of_range"


def test_grid_spec_parse():
    spec = GridSpec.parse("0:1:0.25")
    np.testing.assert_allclose(spec.nodes(), [0.0, 0.25, 0.5, 0.75, 1.0])
    for bad in ("0:1", "a:b:c", "1:0:0.1", "0:1:0"):
        with pytest.raises(ValidationError):
            GridSpec.parse(bad)


def test_overrides_take_precedence(fig2):
    options = fig2[2].with_overrides(x=1.5, c=None, seed=3)
    assert options.x == 1.5
    assert options.c == 4.0
    assert options.seed == 3
    assert options.overrides == {"x": 1.5, "seed": 3}


def test_matrix_grid_lookup():
    grid = MatrixGrid(1.0, 0.5, np.arange(3.0))
    assert grid.x_max == 2.0
    assert grid.index_of(1.5) == 1
    assert grid.at(1.25)[0, 0] == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        grid.index_of(1.3)
    with pytest.raises(ValidationError):
        grid.at(2.5)


def test_frozen_arrays(fig2):
    model = fig2[0]
    with pytest.raises(ValueError):
        model.q_gen[0, 0] = 1.0


def test_run_options_defaults():
    options = RunOptions()
    assert options.paths == 100_000
    assert options.dt == 1e-3
    assert options.t_max == 200.0


def test_laplace_exponent(fig1, random_models):
    model = fig1[0]
    np.testing.assert_array_equal(laplace_exponent(model, 0.0), model.q_gen)
    np.testing.assert_allclose(laplace_exponent(model, 1.0), [[0.45, 0.05], [0.1, 0.62]], atol=1e-15)
    for m in random_models:
        assert np.abs(laplace_exponent(m, 0.0).sum(axis=1)).max() < 1e-12


def test_tabulated_omega_interpolates_and_clamps():
    om = TabulatedOmega([0.0, 1.0, 2.0], [[0.0, 0.4, 0.2], [1.0, 1.0, 1.0]])
    assert omega_eval(om, 1, 0.5) == pytest.approx(0.2)
    assert omega_eval(om, 1, -3.0) == 0.0
    assert omega_eval(om, 1, 7.0) == pytest.approx(0.2)
    assert om.bound_lambda == 1.0


@pytest.mark.parametrize("name", ["fig2", "fig3_step", "omega_model"])
def test_omega_within_bounds(name):
    _, om, _ = load_canned(name)
    rng = np.random.default_rng(5)
    xs = rng.uniform(-10.0, 10.0, size=10_000)
    states = rng.integers(0, om.n_states, size=xs.size)
    vals = om.values(xs)[np.arange(xs.size), states]
    assert np.all(vals >= 0)
    assert np.all(vals <= om.bound_lambda)
