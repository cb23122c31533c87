import math

import numpy as np
import pytest
from scipy.special import gamma

from src.models.integrands import ConvexSpec
from src.models.paths import SampledFunction
from src.services.experiment import fit_loglog
from src.services.fbm_sim import sample_fbm, sample_many
from src.services.fraccalc import (besov_norms, frac_derivative_left, frac_derivative_right, frac_integral_left,
                                   frac_integral_left_all, gls_integral, moment_stability, norm_1beta,
                                   right_frac_integral, sup_frac_derivative_moments)
from src.services.integrand import eval_left_derivative
from src.utils.errors import DomainError, ParameterRangeError


def _sampled(func, n=256):
    return SampledFunction.from_callable(func, n)


def test_integral_power_rule():
    for beta in (0.3, 0.5, 0.8):
        one = _sampled(lambda u: np.ones_like(u))
        assert frac_integral_left(one, beta, 0.75) == pytest.approx(0.75 ** beta / gamma(beta + 1), rel=1e-12)
    identity = _sampled(lambda u: u)
    assert frac_integral_left(identity, 0.5, 1.0) == pytest.approx(1 / gamma(2.5), rel=1e-12)
    assert frac_integral_left(_sampled(np.zeros_like), 0.4, 1.0) == 0.0
    assert frac_integral_left(identity, 0.5, 0.0) == 0.0


def test_right_integral_of_constant():
    one = _sampled(lambda u: np.ones_like(u))
    assert right_frac_integral(one, 0.4, 0.25, 1.0) == pytest.approx(0.75 ** 0.4 / gamma(1.4), rel=1e-12)
    assert right_frac_integral(one, 0.4, 0.5, 0.5) == 0.0


def test_left_derivative_examples():
    constant = _sampled(lambda u: np.full_like(u, 2.5))
    assert frac_derivative_left(constant, 0.3, 0.5) == pytest.approx(2.5 * 0.5 ** -0.3 / gamma(0.7), rel=1e-12)
    identity = _sampled(lambda u: u)
    # форма Вейля (1 + beta/(1-beta))/Gamma(1-beta) совпадает со степенным правилом Gamma(2)/Gamma(2-beta)
    weyl = (1 + 0.3 / 0.7) / gamma(0.7)
    power = gamma(2) / gamma(1.7)
    assert weyl == pytest.approx(power, rel=1e-12)
    assert frac_derivative_left(identity, 0.3, 1.0) == pytest.approx(power, rel=1e-10)
    with pytest.raises(DomainError):
        frac_derivative_left(identity, 0.3, 0.0)
    with pytest.raises(DomainError):
        frac_derivative_left(identity, 0.3, 0.3001)


def test_right_derivative_examples():
    constant = _sampled(lambda u: np.full_like(u, -1.0))
    assert frac_derivative_right(constant, 0.4, 0.5, 1.0) == pytest.approx(0.0, abs=1e-15)
    identity = _sampled(lambda u: u)
    expected = -(0.5 ** 0.6) / gamma(1.6)
    assert frac_derivative_right(identity, 0.4, 0.5, 1.0) == pytest.approx(expected, rel=1e-10)
    with pytest.raises(DomainError):
        frac_derivative_right(identity, 0.4, 1.0, 1.0)


def test_operators_are_linear():
    rng = np.random.default_rng(0)
    f = SampledFunction(values=np.cumsum(rng.normal(size=129)) / 10)
    g = SampledFunction(values=np.sin(np.linspace(0, 3, 129)))
    combined = SampledFunction(values=2.0 * f.values - 3.0 * g.values)
    cases = [
        lambda h: frac_integral_left(h, 0.4, 0.75),
        lambda h: right_frac_integral(h, 0.4, 0.25, 1.0),
        lambda h: frac_derivative_left(h, 0.4, 0.75),
        lambda h: frac_derivative_right(h, 0.4, 0.25, 0.875),
    ]
    for operator in cases:
        assert operator(combined) == pytest.approx(2.0 * operator(f) - 3.0 * operator(g), rel=1e-10, abs=1e-12)


def test_derivative_power_rule_converges():
    beta = 0.4
    n_values = [512, 1024, 2048, 4096]
    errors = []
    for n in n_values:
        square = _sampled(lambda u: u ** 2, n)
        errors.append(abs(frac_derivative_left(square, beta, 0.5) - 2 / gamma(3 - beta) * 0.5 ** (2 - beta)))
    slope, _, _ = fit_loglog(n_values, errors)
    assert slope >= 0.9


def test_derivative_inverts_integral():
    beta = 0.35
    n_values = [64, 128, 256, 512]
    errors = []
    for n in n_values:
        square = _sampled(lambda u: u ** 2, n)
        integral = frac_integral_left_all(square, beta)
        errors.append(max(abs(frac_derivative_left(integral, beta, x) - x ** 2) for x in (0.25, 0.5, 0.75)))
    assert errors[-1] < 1e-3
    slope, _, _ = fit_loglog(n_values, errors)
    assert slope >= 0.9


def test_besov_examples():
    zero = besov_norms(_sampled(np.zeros_like, 64), 0.4)
    assert (zero.norm_1beta, zero.norm_2beta, zero.sup_frac_derivative) == (0.0, 0.0, 0.0)
    for beta in (0.2, 0.5, 0.7):
        assert norm_1beta(_sampled(lambda u: u, 128), beta) == pytest.approx(1 + 1 / (1 - beta), rel=1e-10)


def test_besov_report_on_fbm_path():
    path = sample_fbm(0.8, 256, seed=1)
    sampled = SampledFunction.from_path(path)
    assert np.array_equal(sampled.values, path.values) and sampled.T == 1.0
    report = besov_norms(sampled, 0.3)
    assert report.n_points == 257
    assert math.isfinite(report.norm_1beta) and report.norm_2beta > 0 and report.sup_frac_derivative > 0


def test_gls_smooth_pair():
    f = _sampled(lambda u: u, 1024)
    g = _sampled(lambda u: u ** 2, 1024)
    value, certificate = gls_integral(f, g, 0.4)
    assert value == pytest.approx(2 / 3, abs=2e-3)
    assert abs(value) <= certificate
    unchecked, skipped = gls_integral(f, g, 0.4, certify=False)
    assert unchecked == value and math.isnan(skipped)


def test_gls_of_constant_telescopes():
    one = _sampled(lambda u: np.ones_like(u), 512)
    g = _sampled(lambda u: np.sin(3 * u) + u, 512)
    value, _ = gls_integral(one, g, 0.4)
    assert value == pytest.approx(g.values[-1] - g.values[0], abs=1e-3)
    partial, _ = gls_integral(one, g, 0.4, t=0.5)
    assert partial == pytest.approx(g.values[256] - g.values[0], abs=1e-3)


def test_gls_polynomial_pairs():
    rng = np.random.default_rng(3)
    for _ in range(3):
        a, b = rng.normal(size=(2, 4))
        f = _sampled(lambda u: np.polyval(a, u), 1024)
        g = _sampled(lambda u: np.polyval(b, u), 1024)
        # int_0^1 f g' du
        exact = np.polyval(np.polyint(np.polymul(a, np.polyder(b))), 1.0)
        value, _ = gls_integral(f, g, 0.4)
        assert value == pytest.approx(exact, abs=5e-3)


def test_moments():
    assert sup_frac_derivative_moments(0.75, 0.3, 0.0, 10) == 1.0
    with pytest.raises(ParameterRangeError):
        sup_frac_derivative_moments(0.75, 0.2, 2.0, 10)
    half, full, change = moment_stability(0.75, 0.3, 2.0, 200, n_steps=128, seed=4)
    assert math.isfinite(full) and change < 0.2


@pytest.mark.slow
def test_gls_smooth_pair_acceptance():
    value, _ = gls_integral(_sampled(lambda u: u, 4096), _sampled(lambda u: u ** 2, 4096), 0.4)
    assert value == pytest.approx(2 / 3, abs=1e-3)


@pytest.mark.slow
def test_gls_polynomial_pairs_acceptance():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a, b = rng.normal(size=(2, 4))
        exact = np.polyval(np.polyint(np.polymul(a, np.polyder(b))), 1.0)
        value, _ = gls_integral(_sampled(lambda u: np.polyval(a, u), 4096), _sampled(lambda u: np.polyval(b, u), 4096), 0.4)
        assert abs(value - exact) < 5e-3


@pytest.mark.slow
def test_gls_matches_ito_oracle():
    spec = ConvexSpec.call(0.2)
    gaps = []
    for k, path_values in enumerate(sample_many(0.75, 4096, seed=21, count=100)):
        path = SampledFunction(values=path_values)
        integrand = SampledFunction(values=eval_left_derivative(spec, path_values))
        # сертификат O(N^2) проверяется на первых путях
        value, _ = gls_integral(integrand, path, 0.4, certify=k < 5)
        oracle = max(path_values[-1] - 0.2, 0.0) - max(-0.2, 0.0)
        gaps.append(abs(value - oracle))
    assert np.quantile(gaps, 0.95) < 2e-2


@pytest.mark.slow
def test_besov_norm_stable_under_refinement():
    values = sample_fbm(0.8, 4096, seed=5).values
    fine = norm_1beta(SampledFunction(values=values), 0.6)
    coarse = norm_1beta(SampledFunction(values=values[::2]), 0.6)
    assert abs(fine - coarse) / fine < 0.05


@pytest.mark.slow
def test_moments_acceptance():
    half, full, change = moment_stability(0.75, 0.3, 2.0, 5000, n_steps=1024, seed=1, threads=4)
    assert math.isfinite(full) and change < 0.2
