"""Spectral (mixing) measures of the excess distributions and hyperexponential fits.

For a completely monotone excess tail ``B0bar(u) = int exp(-u y) dH(y)`` the
mixing cdf ``H`` is approximated by a step function with ``k`` equal jumps at
the quantiles ``H(lambda_i) = i / (k + 1)``.  The resulting ``k``-phase
hyperexponential tail is within ``1 / (k + 1)`` of ``B0bar`` uniformly in ``u``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammainc, gammaincc

from .distributions import AbateWhitt, ClaimModel, Pareto, WeibullHalf
from .errors import DomainError, NumericError

__all__ = [
    "SpectralCdf",
    "HyperExp",
    "spectral_cdf",
    "spectral_density",
    "spectral_quantile",
    "fit_hyperexp",
]


# -- closed forms -----------------------------------------------------------

def _aw_cdf(model: AbateWhitt, y):
    # density mu(1+mu) / (pi sqrt(y) (y+1) (y+mu^2)); with t = sqrt(y) the
    # integrand is rational in t and integrates to arctangents
    mu = model.mu
    t = np.sqrt(y)
    return 2.0 / (math.pi * (mu - 1.0)) * (mu * np.arctan(t) - np.arctan(t / mu))


def _aw_density(model: AbateWhitt, y):
    mu = model.mu
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return mu * (1.0 + mu) / (math.pi * np.sqrt(y) * (y + 1.0) * (y + mu * mu))


def _weibull_cdf(model: WeibullHalf, y):
    with np.errstate(divide="ignore"):
        return gammaincc(1.5, 1.0 / (4.0 * model.a * y))


def _weibull_density(model: WeibullHalf, y):
    a = model.a
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(-1.0 / (4.0 * a * y)) / (4.0 * a**1.5 * math.sqrt(math.pi) * y**2.5)
    return np.where(y > 0, out, 0.0)


def _pareto_cdf(model: Pareto, y):
    return gammainc(model.alpha - 1.0, y / model.b)


def _pareto_density(model: Pareto, y):
    y = np.asarray(y, dtype=float)
    s, b = model.alpha - 1.0, model.b
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = (s - 1.0) * np.log(y / b) - y / b - math.lgamma(s) - math.log(b)
        return np.where(y > 0, np.exp(logd), 0.0 if s >= 1 else np.inf)


_CLOSED = {
    AbateWhitt: (_aw_cdf, _aw_density),
    WeibullHalf: (_weibull_cdf, _weibull_density),
    Pareto: (_pareto_cdf, _pareto_density),
}


def _closed_form(model: ClaimModel):
    try:
        return _CLOSED[type(model)]
    except KeyError:
        raise DomainError(f"no spectral measure known for {model!r}") from None


# -- quadrature route -------------------------------------------------------

def _aw_quad(model: AbateWhitt, y: float) -> float:
    mu = model.mu
    c = 2.0 * mu * (1.0 + mu) / math.pi
    val, _ = integrate.quad(lambda t: c / ((t * t + 1.0) * (t * t + mu * mu)),
                            0.0, math.sqrt(y), epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _weibull_quad(model: WeibullHalf, y: float) -> float:
    # y h(y) on a log scale: vanishes like exp(-1/y) at 0 and like y^{-3/2} at infinity
    f = lambda s: float(_weibull_density(model, math.exp(s))) * math.exp(s)
    top = min(math.log(y), 250.0)
    pieces = [p for p in (-60.0, -10.0, 0.0, 10.0, 50.0, 250.0) if p < top] + [top]
    total = 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=400)
        total += val
    return total


def _pareto_quad(model: Pareto, y: float) -> float:
    # Gamma(alpha - 1, scale b) density in x = y/b, its x^{s-1} factor handed to quad as a weight
    s = model.alpha - 1.0
    x = y / model.b
    norm = math.gamma(s)
    val, _ = integrate.quad(lambda t: math.exp(-t) / norm, 0.0, min(x, 1.0), weight="alg",
                            wvar=(s - 1.0, 0.0), epsabs=1e-15, epsrel=1e-12)
    if x > 1.0:
        f = lambda t: math.exp((s - 1.0) * math.log(t) - t - math.lgamma(s))
        more, _ = integrate.quad(f, 1.0, x, epsabs=1e-15, epsrel=1e-12, limit=400)
        val += more
    return val


_QUAD = {AbateWhitt: _aw_quad, WeibullHalf: _weibull_quad, Pareto: _pareto_quad}


def _quad_cdf_scalar(model: ClaimModel, y: float) -> float:
    if y <= 0:
        return 0.0
    return _QUAD[type(model)](model, y)


def _quad_mass(model: ClaimModel) -> float:
    return _quad_cdf_scalar(model, math.inf)


class SpectralCdf:
    """Mixing cdf ``H`` of the excess tail of ``model``.

    ``method="closed"`` uses the closed forms (arctangents for Abate-Whitt,
    regularized incomplete gamma functions for Weibull and Pareto);
    ``method="quadrature"`` integrates the density numerically and serves as an
    independent route.  The total mass is checked by quadrature on construction.
    """

    def __init__(self, model: ClaimModel, method: str = "closed"):
        if method not in ("closed", "quadrature"):
            raise DomainError(f"unknown method {method!r}")
        model._require_finite_mean()
        self.model = model
        self.form = method
        self._cdf, self._density = _closed_form(model)
        self.normalizer = _quad_mass(model)
        if abs(self.normalizer - 1.0) > 1e-8:
            raise NumericError(f"spectral mass of {model!r} integrates to {self.normalizer!r}")

    def __repr__(self):
        return f"SpectralCdf({self.model!r}, method={self.form!r})"

    def cdf(self, y):
        arr = np.asarray(y, dtype=float)
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise DomainError("spectral cdf is defined for y >= 0")
        if self.form == "closed":
            out = np.where(arr > 0, self._cdf(self.model, np.where(arr > 0, arr, 1.0)), 0.0)
        else:
            out = np.vectorize(lambda v: _quad_cdf_scalar(self.model, float(v)), otypes=[float])(arr)
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def density(self, y):
        arr = np.asarray(y, dtype=float)
        out = self._density(self.model, arr)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, p):
        """Solve ``H(y) = p`` by bisection on a geometric bracket."""
        parr = np.asarray(p, dtype=float)
        if np.any(~((parr > 0) & (parr < 1))):
            raise DomainError("quantile level must lie in (0, 1)")
        flat = parr.ravel()
        lo = np.full(flat.shape, 1e-12)
        hi = np.ones(flat.shape)
        H = self.cdf
        # widen the bracket until it straddles p
        while True:
            need = H(hi) < flat
            if not np.any(need):
                break
            hi = np.where(need, hi * 2.0, hi)
            if np.any(hi > 1e12):
                raise NumericError("quantile bracket expanded beyond 1e12")
        while True:
            need = H(lo) >= flat
            if not np.any(need):
                break
            lo = np.where(need, lo * 0.5, lo)
            if np.any(lo < 1e-300):
                raise NumericError("quantile bracket shrank below 1e-300")
        for _ in range(400):
            mid = np.sqrt(lo * hi)
            below = H(mid) < flat
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi <= lo * (1.0 + 1e-13)):
                break
        out = np.sqrt(lo * hi).reshape(parr.shape)
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _spectral(model: ClaimModel, method: str = "closed") -> SpectralCdf:
    return SpectralCdf(model, method)


def spectral_cdf(model: ClaimModel, y):
    """Mixing cdf ``H(y)`` of the excess distribution of ``model``."""
    return _spectral(model).cdf(y)


def spectral_density(model: ClaimModel, y):
    return _spectral(model).density(y)


def spectral_quantile(model: ClaimModel, p):
    """The unique ``y`` with ``H(y) = p`` for ``0 < p < 1``."""
    return _spectral(model).quantile(p)


@dataclass(frozen=True)
class HyperExp:
    """Finite mixture of exponentials with tail ``sum_i w_i exp(-rate_i u)``."""

    rates: np.ndarray
    weights: np.ndarray
    epsilon: float = math.nan
    k: int = field(init=False)

    def __post_init__(self):
        rates = np.array(self.rates, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if rates.size == 0 or rates.shape != weights.shape:
            raise DomainError("rates and weights must be non-empty and of equal length")
        if np.any(rates <= 0) or np.any(~np.isfinite(rates)):
            raise DomainError("rates must be positive and finite")
        if np.any(np.diff(rates) <= 0):
            raise DomainError("rates must be strictly increasing")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise DomainError("weights must be positive and sum to one")
        rates.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "k", rates.size)

    def ccdf(self, u):
        arr = np.asarray(u, dtype=float)
        out = np.exp(-np.multiply.outer(arr, self.rates)) @ self.weights
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, u):
        return 1.0 - self.ccdf(u)

    def laplace(self, s):
        """Laplace-Stieltjes transform ``sum_i w_i rate_i / (rate_i + s)``."""
        arr = np.asarray(s, dtype=float)
        out = (self.rates / np.add.outer(arr, self.rates)) @ self.weights
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        return float(np.sum(self.weights / self.rates))


def fit_hyperexp(model: ClaimModel, k: int, method: str = "closed") -> HyperExp:
    """Equal-weight ``k``-phase hyperexponential fit of the excess distribution.

    The rates are the ``i/(k+1)`` quantiles of the mixing cdf; the fit is
    within ``epsilon = 1/(k+1)`` of the excess tail in sup norm.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    k = int(k)
    eps = 1.0 / (k + 1)
    rates = _spectral(model, method).quantile(np.arange(1, k + 1) * eps)
    rates = np.atleast_1d(rates)
    if np.any(np.diff(rates) <= 0):
        raise NumericError("quantile rates are not strictly increasing")
    return HyperExp(rates, np.full(k, 1.0 / k), eps)
