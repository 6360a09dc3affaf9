import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from ruinkit import (AbateWhitt, DomainError, HyperExp, NumericError, Pareto, SpectralCdf, WeibullHalf,
                     fit_hyperexp, spectral_cdf, spectral_density, spectral_quantile)
from ruinkit.distributions import excess_tail_point

MODELS = [AbateWhitt(2.0), AbateWhitt(0.4), WeibullHalf(3.0), WeibullHalf(0.25), Pareto(4.0, 3.0), Pareto(2.2, 0.5)]


def _lower_gamma_reg(s, x, terms=400):
    # P(s, x) = x^s e^{-x} sum_n x^n / Gamma(s + n + 1)
    total, term = 0.0, 1.0 / math.gamma(s + 1.0)
    for n in range(terms):
        total += term
        term *= x / (s + n + 1.0)
    return math.exp(s * math.log(x) - x) * total


def _gamma_median(s):
    lo, hi = 0.0, 10.0 * s + 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if _lower_gamma_reg(s, mid) < 0.5 else (lo, mid)
    return 0.5 * (lo + hi)


def test_cdf_vanishes_at_zero():
    for m in MODELS:
        assert spectral_cdf(m, 0.0) == 0.0


def test_pareto_median_against_series_oracle():
    model = Pareto(4.0, 3.0)
    med = 3.0 * _gamma_median(3.0)
    assert med == pytest.approx(8.02, abs=5e-3)
    assert spectral_cdf(model, med) == pytest.approx(0.5, abs=1e-9)
    assert spectral_quantile(model, 0.5) == pytest.approx(med, rel=1e-10)


def test_weibull_quantile_against_gamma_three_halves():
    # H(y) = Q(3/2, 1/(4ay)), so the median sits at y = 1 / (4 a m) with m the Gamma(3/2) median
    a = 3.0
    y = 1.0 / (4.0 * a * _gamma_median(1.5))
    assert spectral_quantile(WeibullHalf(a), 0.5) == pytest.approx(y, rel=1e-10)
    assert SpectralCdf(WeibullHalf(a), "quadrature").cdf(y) == pytest.approx(0.5, abs=1e-9)


def test_abate_whitt_total_mass():
    assert spectral_cdf(AbateWhitt(2.0), 1e8) == pytest.approx(1.0, abs=1e-6)
    assert SpectralCdf(AbateWhitt(2.0)).normalizer == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_round_trip(model):
    p = np.linspace(0.1, 0.9, 9)
    np.testing.assert_allclose(spectral_cdf(model, spectral_quantile(model, p)), p, atol=1e-9)


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_closed_form_agrees_with_quadrature(model):
    closed, quad = SpectralCdf(model), SpectralCdf(model, method="quadrature")
    y = np.geomspace(1e-4, 1e4, 25) * spectral_quantile(model, 0.5)
    np.testing.assert_allclose(closed.cdf(y), quad.cdf(y), atol=1e-8)


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_mixture_reproduces_excess_tail(model):
    # B0bar(u) = int exp(-u y) h(y) dy, integrated on log y
    f = lambda s, u: math.exp(-u * math.exp(s)) * spectral_density(model, math.exp(s)) * math.exp(s)
    for u in np.linspace(0.0, excess_tail_point(model, 1e-3), 12):
        pieces = np.linspace(-40.0, 40.0, 17)
        val = sum(integrate.quad(f, a, b, args=(u,), epsabs=1e-13, limit=200)[0] for a, b in zip(pieces, pieces[1:]))
        assert val == pytest.approx(model.excess_ccdf(u), abs=1e-8)


def test_corrected_weibull_claim_measure():
    # dG(y) = exp(-1/(4ay)) / (2 sqrt(pi a) y^{3/2}) mixes exp(-sqrt(u/a)) and has int dG / y = 2a
    a = 3.0
    g = lambda y: math.exp(-1.0 / (4 * a * y)) / (2 * math.sqrt(math.pi * a) * y**1.5)
    for u in (0.5, 3.0, 20.0):
        val, _ = integrate.quad(lambda y: math.exp(-u * y) * g(y), 0, np.inf, epsabs=1e-13, limit=400)
        assert val == pytest.approx(WeibullHalf(a).ccdf(u), abs=1e-9)
    mean, _ = integrate.quad(lambda y: g(y) / y, 0, np.inf, limit=400)
    assert mean == pytest.approx(2 * a, rel=1e-8)
    # the alternative parameterization mixes exp(-a sqrt(u)) instead
    g_alt = lambda y: a * math.exp(-a * a / (4 * y)) / (2 * math.sqrt(math.pi * y**3))
    val, _ = integrate.quad(lambda y: math.exp(-3.0 * y) * g_alt(y), 0, np.inf, limit=400)
    assert val == pytest.approx(math.exp(-a * math.sqrt(3.0)), abs=1e-9)


def test_weibull_density_normalization():
    a = 3.0
    total, _ = integrate.quad(lambda y: spectral_density(WeibullHalf(a), y), 0, np.inf, limit=400)
    assert total == pytest.approx(1.0, abs=1e-9)
    # with 4a in place of 4a^{3/2} the mass is sqrt(a), not one
    alt, _ = integrate.quad(lambda y: math.exp(-1 / (4 * a * y)) / (4 * a * math.sqrt(math.pi) * y**2.5), 0, np.inf)
    assert alt == pytest.approx(math.sqrt(a), rel=1e-8)


def test_quantile_errors():
    with pytest.raises(DomainError):
        spectral_quantile(Pareto(4, 3), 0.0)
    with pytest.raises(DomainError):
        spectral_quantile(Pareto(4, 3), 1.0)
    with pytest.raises(DomainError):
        spectral_cdf(Pareto(4, 3), -1.0)
    with pytest.raises(NumericError):
        spectral_quantile(Pareto(4.0, 1e13), 0.5)
    with pytest.raises(DomainError):
        SpectralCdf(Pareto(4, 3), method="magic")


def test_fit_examples():
    hx = fit_hyperexp(Pareto(4.0, 3.0), 1)
    assert hx.k == 1 and hx.weights[0] == 1.0 and hx.epsilon == 0.5
    assert hx.rates[0] == pytest.approx(3.0 * _gamma_median(3.0), rel=1e-10)
    hx = fit_hyperexp(AbateWhitt(2.0), 10)
    assert hx.epsilon == pytest.approx(1 / 11) and np.all(np.diff(hx.rates) > 0)
    np.testing.assert_allclose(hx.weights, 0.1)


def test_fit_sup_norm_pareto_k20():
    model = Pareto(4.0, 3.0)
    grid = np.linspace(0.0, excess_tail_point(model, 1e-4), 2000)
    hx = fit_hyperexp(model, 20)
    assert np.max(np.abs(model.excess_ccdf(grid) - hx.ccdf(grid))) <= 1 / 21


@pytest.mark.parametrize("model", MODELS, ids=repr)
def test_sup_norm_shrinks_with_k(model):
    top = excess_tail_point(model, 1e-6)
    grid = np.concatenate(([0.0], np.geomspace(1e-8, top, 3000)))
    exact = model.excess_ccdf(grid)
    sups = [np.max(np.abs(exact - fit_hyperexp(model, k).ccdf(grid))) for k in (1, 5, 10, 20, 100)]
    assert all(b <= a for a, b in zip(sups, sups[1:]))


def test_jump_size_identity():
    for k in range(1, 200):
        eps = Fraction(1, k + 1)
        assert Fraction(1, k) == eps + eps**2 / (1 - eps)


def test_fitted_mean_converges():
    # excess mean of Pareto(4, 3) is E U^2 / (2 E U) = 1/6
    assert fit_hyperexp(Pareto(4.0, 3.0), 100).mean() == pytest.approx(1 / 6, rel=0.1)


def test_fit_rejects_bad_k():
    for k in (0, -3, 2.5):
        with pytest.raises(DomainError):
            fit_hyperexp(Pareto(4, 3), k)


def test_hyperexp_validation_and_basics():
    hx = HyperExp([1.0, 3.0], [0.5, 0.5])
    assert hx.laplace(0.0) == 1.0
    assert hx.laplace(1.0) == pytest.approx(0.625)
    assert hx.ccdf(0.0) == pytest.approx(1.0)
    assert hx.mean() == pytest.approx(0.5 + 1 / 6)
    with pytest.raises(ValueError):
        hx.rates[0] = 2.0
    for rates, weights in ([[1.0, 1.0], [0.5, 0.5]], [[2.0, 1.0], [0.5, 0.5]], [[1.0], [0.9]],
                           [[-1.0], [1.0]], [[], []], [[1.0, 2.0], [1.2, -0.2]]):
        with pytest.raises(DomainError):
            HyperExp(rates, weights)
