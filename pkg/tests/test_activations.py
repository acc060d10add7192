import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weightinit.activations import (
    BUILTIN_NAMES,
    builtin,
    central_difference,
    custom,
    from_samples,
    load_custom,
    resolve,
)
from weightinit.errors import NumericDomainError, UnknownActivationError


@pytest.mark.parametrize(
    "name, g0, dg0",
    [("tanh", 0.0, 1.0), ("sigmoid", 0.5, 0.25), ("identity", 0.0, 1.0)],
)
def test_builtin_values_at_zero(name, g0, dg0):
    spec = builtin(name)
    assert spec.name == name
    assert spec.value_at_zero == g0
    assert spec.deriv_at_zero == dg0


def test_relu_has_no_derivative():
    relu = builtin("relu")
    assert relu.deriv_at_zero is None
    assert not relu.differentiable_at_zero
    xs = np.linspace(-5, 5, 101)
    np.testing.assert_array_equal(relu(xs), np.maximum(0.0, xs))


def test_unknown_name():
    with pytest.raises(UnknownActivationError):
        builtin("leaky_relu")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_evaluator_at_zero_is_exact(name):
    spec = builtin(name)
    assert spec(0.0) == spec.value_at_zero


@pytest.mark.parametrize("name", ["identity", "tanh", "sigmoid"])
def test_central_difference_matches_analytic(name):
    spec = builtin(name)
    assert abs(central_difference(spec.evaluator, 1e-5) - spec.deriv_at_zero) < 1e-6


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_evaluator_finite_everywhere(name):
    spec = builtin(name)
    xs = np.array([-1e300, -750.0, -1.0, 0.0, 1.0, 750.0, 1e300])
    assert np.all(np.isfinite(spec(xs)))


@given(st.floats(min_value=-10, max_value=10))
def test_tanh_is_odd(x):
    tanh = builtin("tanh")
    assert abs(tanh(-x) + tanh(x)) <= 1e-12


class TestCustom:
    def test_tanh(self):
        spec = custom(math.tanh, step=1e-5)
        assert abs(spec.deriv_at_zero - 1.0) < 1e-6
        assert spec.value_at_zero == 0.0

    def test_linear(self):
        spec = custom(lambda x: x, step=1e-5)
        assert spec.deriv_at_zero == pytest.approx(1.0, abs=1e-12)

    def test_sigmoid(self):
        spec = custom(lambda x: 1.0 / (1.0 + math.exp(-x)), step=1e-5)
        assert abs(spec.deriv_at_zero - 0.25) < 1e-6
        assert spec.value_at_zero == 0.5

    def test_non_finite_near_zero(self):
        with pytest.raises(NumericDomainError):
            custom(lambda x: 1.0 / x)

    def test_log_raises_domain(self):
        with pytest.raises(NumericDomainError):
            custom(math.log)

    def test_bad_step(self):
        with pytest.raises(NumericDomainError):
            custom(math.tanh, step=0.0)


class TestSampleTable:
    def test_piecewise_linear(self):
        spec = from_samples([[-1, -0.5], [0, 0.0], [1, 2.0]], name="kinked")
        assert spec.name == "kinked"
        assert spec.value_at_zero == 0.0
        # central difference straddles the two slopes 0.5 and 2
        assert spec.deriv_at_zero == pytest.approx(1.25)
        assert spec(0.5) == pytest.approx(1.0)
        assert spec(5.0) == 2.0

    def test_unsorted_input_is_sorted(self):
        spec = from_samples([[1, 1.0], [-1, -1.0]])
        assert spec.deriv_at_zero == pytest.approx(1.0)

    @pytest.mark.parametrize("bad", [[[0, 1]], [[0, 1], [0, 2]], [[0, float("nan")], [1, 1]], [1, 2, 3]])
    def test_invalid_tables(self, bad):
        with pytest.raises(NumericDomainError):
            from_samples(bad)

    def test_load_file(self, tmp_path):
        path = tmp_path / "soft.json"
        xs = np.linspace(-4, 4, 81)
        path.write_text(json.dumps({"name": "soft", "samples": [[x, math.tanh(x)] for x in xs]}))
        spec = load_custom(path)
        assert spec.name == "soft"
        assert spec.deriv_at_zero == pytest.approx(math.tanh(0.1) / 0.1)
        assert resolve(str(path)).name == "soft"
