import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.models.integrands import ConvexSpec, Hypothesis, LipschitzSpec, parse_integrand
from src.services.integrand import (check_hypothesis, constant_C, eval_f, eval_left_derivative,
                                    rate_param_violations, validate_rate_params)
from src.services.lipschitz import LIPSCHITZ_REGISTRY
from src.utils.errors import DomainError


def test_eval_f_examples(call_at_zero):
    assert eval_f(call_at_zero, 1.0) == 1.0
    assert eval_f(call_at_zero, -1.0) == 0.0
    assert eval_f(ConvexSpec(slope0=2, intercept0=3), 5.0) == 13.0
    assert eval_f(ConvexSpec(atoms=[(-1, 1), (1, 1)]), 0.0) == 1.0


def test_left_derivative_examples(call_at_zero):
    assert eval_left_derivative(call_at_zero, 0.0) == 0.0
    assert eval_left_derivative(call_at_zero, 0.001) == 1.0
    assert eval_left_derivative(ConvexSpec(slope0=2), -7.5) == 2.0
    spec = ConvexSpec(atoms=[(-1, 1), (1, 2)])
    assert eval_left_derivative(spec, 1.0) == 1.0
    assert eval_left_derivative(spec, 1.5) == 3.0


def test_atoms_validation():
    with pytest.raises(ValidationError):
        ConvexSpec(atoms=[(0, -1)])
    with pytest.raises(ValidationError):
        ConvexSpec(atoms=[(1, 1), (0, 1)])


def test_convexity_and_monotone_derivative():
    rng = np.random.default_rng(0)
    spec = ConvexSpec(atoms=[(-0.7, 0.5), (0.1, 2.0), (1.3, 0.25)], slope0=-1.0, intercept0=0.4)
    x, y, z = np.sort(rng.uniform(-3, 3, size=(3, 1000)), axis=0)
    chord = ((z - y) * eval_f(spec, x) + (y - x) * eval_f(spec, z)) / (z - x)
    assert np.all(eval_f(spec, y) <= chord + 1e-12)
    assert np.all(eval_left_derivative(spec, x) <= eval_left_derivative(spec, y))


def test_fundamental_theorem_on_piecewise_linear():
    rng = np.random.default_rng(1)
    spec = ConvexSpec(atoms=[(-1.0, 1.0), (0.5, 0.5)], slope0=0.3)
    for x, y in np.sort(rng.uniform(-2, 2, size=(50, 2)), axis=1):
        knots = np.concatenate(([x], spec.locations[(spec.locations > x) & (spec.locations < y)], [y]))
        # на каждом куске f'_- постоянна и равна значению в правом конце
        integral = sum((b - a) * eval_left_derivative(spec, b) for a, b in zip(knots[:-1], knots[1:]))
        assert eval_f(spec, y) - eval_f(spec, x) == pytest.approx(integral, abs=1e-10)


def test_constant_C():
    assert constant_C(0.0) == 1.0
    assert constant_C(1.0) == 1.0
    assert constant_C(2.0) == pytest.approx(2 * math.exp(-0.5), abs=1e-12)
    a = np.linspace(2, 10, 200)
    values = constant_C(a)
    assert np.all(np.diff(values) < 0)
    assert np.all(constant_C(-a) > 0)
    assert np.all(values <= np.maximum(1, np.abs(a)))


def test_hypotheses(call_at_zero):
    assert check_hypothesis(call_at_zero, Hypothesis.H1, p=1.6) == (True, 1.0)
    holds, value = check_hypothesis(ConvexSpec(atoms=[(0, 1), (2, 1)]), "H3")
    assert holds and value == pytest.approx(1 + math.exp(-0.5))
    with pytest.raises(DomainError):
        check_hypothesis(ConvexSpec.call(-1.0), Hypothesis.H2, p=1.6)
    holds, value = check_hypothesis(ConvexSpec.call(math.e), Hypothesis.H2, p=2.0)
    assert holds and value == pytest.approx(1.0)


def test_rate_params():
    assert validate_rate_params(0.75, 1.6, 0.3)
    assert not validate_rate_params(0.75, 1.4, 0.3)
    assert not validate_rate_params(0.6, 1.3, 1 - 1.2 / 1.3)
    assert "2H < p < H/(1-H)" in rate_param_violations(0.75, 1.4, 0.3)[0]


@pytest.mark.parametrize("name", sorted(LIPSCHITZ_REGISTRY))
def test_lipschitz_registry(name):
    spec = LipschitzSpec(lipschitz=name)
    rng = np.random.default_rng(2)
    x, y = rng.uniform(-4, 4, size=(2, 2000))
    assert np.all(np.abs(spec(y) - spec(x)) <= spec.lipschitz_constant * np.abs(y - x) + 1e-12)
    # F' = f по центральной разности
    h = 1e-5
    derivative = (spec.antiderivative(x + h) - spec.antiderivative(x - h)) / (2 * h)
    smooth = np.abs(np.abs(x) - 1.0) > 1e-3
    assert np.allclose(derivative[smooth], spec(x)[smooth], atol=1e-6)


def test_parse_integrand():
    convex = parse_integrand({"atoms": [[0.2, 1.0]], "slope0": 0.0, "intercept0": 0.0})
    assert isinstance(convex, ConvexSpec) and convex.atoms == ((0.2, 1.0),)
    assert isinstance(parse_integrand({"lipschitz": "clipped_identity"}), LipschitzSpec)
    with pytest.raises(ValidationError):
        parse_integrand({"lipschitz": "no_such_function"})
