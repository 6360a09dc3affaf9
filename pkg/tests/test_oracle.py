import math

import numpy as np
import pytest
from scipy import integrate, stats

from ruinkit import (AbateWhitt, DomainError, EmpiricalRuin, McConfig, Pareto, WeibullHalf,
                     exact_ruin_abate_whitt, grid_convolve, mc_ruin, sample_excess, simulate_maximum,
                     spectral_ruin)
from ruinkit.oracle import excess_inverse

FAMILIES = [AbateWhitt(2.0), WeibullHalf(3.0), Pareto(4.0, 3.0)]


def test_exact_atom_at_zero():
    rng = np.random.default_rng(3)
    for _ in range(20):
        mu, rho = rng.uniform(0.1, 10.0), rng.uniform(0.01, 0.99)
        if abs(mu - 1) < 1e-3:
            continue
        assert exact_ruin_abate_whitt(mu, rho, 0.0) == pytest.approx(rho, rel=1e-12)


@pytest.mark.parametrize("mu,rho", [(2.0, 0.5), (0.5, 0.8), (3.0, 0.2)])
def test_exact_against_transform(mu, rho):
    # int e^{-su} psi(u) du = (1 - (1 - rho) / (1 - rho L0(s))) / s, with L0(s) = 1 - s int e^{-su} B0bar(u) du
    model = AbateWhitt(mu)

    def lap(f, s):
        g = lambda t: f(math.exp(t)) * math.exp(-s * math.exp(t)) * math.exp(t)
        cuts = np.linspace(-40.0, math.log(60.0 / s), 12)
        return sum(integrate.quad(g, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0] for a, b in zip(cuts, cuts[1:]))

    for s in (0.05, 0.5, 3.0):
        L0 = 1.0 - s * lap(model.excess_ccdf, s)
        expected = (1.0 - (1.0 - rho) / (1.0 - rho * L0)) / s
        got = lap(lambda u: exact_ruin_abate_whitt(mu, rho, u), s)
        assert got == pytest.approx(expected, rel=1e-8)


def test_exact_against_monte_carlo():
    u = np.array([0.5, 2.0, 10.0, 50.0])
    est = mc_ruin(AbateWhitt(2.0), 0.6, McConfig(samples=400_000, seed=5, u_grid=tuple(u)))
    exact = exact_ruin_abate_whitt(2.0, 0.6, u)
    assert np.all(np.abs(est.estimate - exact) <= 3 * est.half_width)


def test_exact_against_fine_spectral():
    sol = spectral_ruin(AbateWhitt(2.0), 0.5, k=1000)
    u = np.geomspace(1e-3, 1e4, 60)
    assert np.max(np.abs(exact_ruin_abate_whitt(2.0, 0.5, u) - sol(u))) <= sol.delta


def test_exact_domain():
    with pytest.raises(DomainError):
        exact_ruin_abate_whitt(2.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        exact_ruin_abate_whitt(2.0, 0.5, -1.0)


@pytest.mark.parametrize("model", FAMILIES, ids=lambda m: m.family)
def test_sampler_ks(model):
    draws = sample_excess(model, np.random.default_rng(17), 10**5)
    res = stats.kstest(draws, lambda x: 1.0 - model.excess_ccdf(np.maximum(x, 0.0)))
    assert res.pvalue > 0.01


@pytest.mark.parametrize("model", [WeibullHalf(3.0), Pareto(4.0, 3.0)], ids=lambda m: m.family)
def test_inverse_closed_form_matches_bisection(model):
    v = np.linspace(0.0, 0.999, 50)
    np.testing.assert_allclose(excess_inverse(model, v), excess_inverse(model, v, method="bisection"),
                               rtol=1e-8, atol=1e-12)


def test_abate_whitt_inverse_round_trip():
    model = AbateWhitt(2.0)
    v = np.linspace(0.01, 0.99, 40)
    np.testing.assert_allclose(model.excess_ccdf(excess_inverse(model, v)), 1 - v, atol=1e-9)
    with pytest.raises(DomainError):
        excess_inverse(model, 1.0)


def test_mc_atom_and_table_values():
    cfg = McConfig(samples=10**6, seed=1, u_grid=(0.0, 5.0))
    est = mc_ruin(WeibullHalf(3.0), 0.7, cfg)
    assert abs(est.estimate[0] - 0.7) <= 3 * est.half_width[0]
    assert abs(est.estimate[1] - 0.60745) <= 3 * est.half_width[1]
    est = mc_ruin(Pareto(4.0, 3.0), 0.7, McConfig(samples=10**6, seed=1, u_grid=(1.0,)))
    assert abs(est.estimate[0] - 0.11499) <= 3 * est.half_width[0]


def test_mc_replay_is_bit_identical():
    model = Pareto(4.0, 3.0)
    a = simulate_maximum(model, 0.8, 50_000, seed=42, partitions=3, workers=1)
    b = simulate_maximum(model, 0.8, 50_000, seed=42, partitions=3, workers=3)
    np.testing.assert_array_equal(a.maxima, b.maxima)
    c = simulate_maximum(model, 0.8, 50_000, seed=43, partitions=3)
    assert not np.array_equal(a.maxima, c.maxima)


def test_empirical_ruin():
    emp = EmpiricalRuin([0.0, 0.0, 1.0, 2.0])
    np.testing.assert_allclose(emp([0.0, 0.5, 1.0, 2.0]), [0.5, 0.5, 0.25, 0.0])
    assert emp.half_width(0.0) == pytest.approx(1.96 * 0.25)


@pytest.mark.parametrize("kwargs", [dict(samples=0), dict(seed=-1), dict(partitions=0), dict(u_grid=(1.0, 0.5)),
                                    dict(u_grid=(-1.0,))])
def test_mc_config_validation(kwargs):
    with pytest.raises(DomainError):
        McConfig(**kwargs)


def test_convolve_with_point_mass():
    grid = np.linspace(0.0, 10.0, 1001)
    A = 1.0 - np.exp(-grid)
    np.testing.assert_allclose(grid_convolve(A, np.ones_like(grid), grid), A, atol=1e-15)


def test_convolve_exponentials():
    grid = np.linspace(0.0, 20.0, 4001)
    E = 1.0 - np.exp(-grid)
    out = grid_convolve(E, E, grid)
    assert np.max(np.abs(out - stats.gamma(2).cdf(grid))) <= 5e-3


def test_convolve_symmetric():
    grid = np.linspace(0.0, 30.0, 3001)
    A = 1.0 - Pareto(4.0, 3.0).excess_ccdf(grid)
    B = 1.0 - WeibullHalf(3.0).excess_ccdf(grid)
    np.testing.assert_allclose(grid_convolve(A, B, grid), grid_convolve(B, A, grid), atol=1e-12)


def test_convolve_grid_checks():
    with pytest.raises(DomainError):
        grid_convolve(np.ones(3), np.ones(3), np.array([0.0, 1.0, 3.0]))
    with pytest.raises(DomainError):
        grid_convolve(np.ones(3), np.ones(3), np.array([1.0, 2.0, 3.0]))
    with pytest.raises(DomainError):
        grid_convolve(np.ones(3), np.ones(4), np.array([0.0, 1.0, 2.0]))
