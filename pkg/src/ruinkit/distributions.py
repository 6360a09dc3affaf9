"""Completely monotone claim-size families.

Three heavy-tailed families are supported, each with a closed-form tail,
integrated-tail (excess) distribution and moments:

* ``AbateWhitt(mu)``: Laplace transform ``1 - s / ((mu + sqrt(s)) (1 + sqrt(s)))``,
  mean ``1/mu`` and infinite higher moments.
* ``WeibullHalf(a)``: Weibull with shape 1/2 and scale ``a``, tail ``exp(-sqrt(u/a))``.
* ``Pareto(alpha, b)``: Lomax tail ``(1 + b u)^(-alpha)``.

All models are immutable.  Tail functions accept scalars or arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfcx

from .errors import DomainError, NumericError

__all__ = [
    "ClaimModel",
    "AbateWhitt",
    "WeibullHalf",
    "Pareto",
    "MomentSet",
    "zeta",
    "claim_ccdf",
    "excess_ccdf",
    "moments",
    "excess_tail_point",
    "model_from_params",
]


def _nonneg(u):
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("u must be a non-negative real")
    return arr


def _out(arr):
    arr = np.clip(arr, 0.0, 1.0)
    return float(arr) if arr.ndim == 0 else arr


def zeta(u):
    """``exp(u) * erfc(sqrt(u))`` evaluated through the scaled erfc.

    The direct product overflows for ``u`` beyond ~700; ``erfcx`` does not.
    """
    arr = _nonneg(u)
    out = erfcx(np.sqrt(arr))
    return float(out) if out.ndim == 0 else out


class MomentSet(NamedTuple):
    """Raw moments ``E U``, ``E U^2``, ``E U^3``; ``math.inf`` marks a divergent moment."""

    m1: float
    m2: float
    m3: float

    def is_finite(self, order: int) -> bool:
        return math.isfinite(self[order - 1])


class ClaimModel:
    """Base class of the claim-size families."""

    family: str = ""

    def ccdf(self, u):
        raise NotImplementedError

    def excess_ccdf(self, u):
        raise NotImplementedError

    def moments(self) -> MomentSet:
        raise NotImplementedError

    def mean(self) -> float:
        return self.moments().m1

    def params(self) -> dict:
        raise NotImplementedError

    def _require_finite_mean(self):
        if not math.isfinite(self.mean()):
            raise DomainError(f"{self!r} has an infinite mean; the excess distribution is undefined")


@dataclass(frozen=True)
class AbateWhitt(ClaimModel):
    mu: float

    family = "abate-whitt"

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError(f"Abate-Whitt requires mu > 0, got {self.mu}")
        # removable singularity of the tail formula
        if abs(self.mu - 1.0) < 1e-9:
            raise DomainError("Abate-Whitt with mu = 1 is not supported")

    def ccdf(self, u):
        u = _nonneg(u)
        mu = self.mu
        return _out((zeta(u) - mu * zeta(mu * mu * u)) / (1.0 - mu))

    def excess_ccdf(self, u):
        u = _nonneg(u)
        mu = self.mu
        return _out((zeta(mu * mu * u) - mu * zeta(u)) / (1.0 - mu))

    def moments(self) -> MomentSet:
        return MomentSet(1.0 / self.mu, math.inf, math.inf)

    def params(self) -> dict:
        return {"mu": self.mu}


@dataclass(frozen=True)
class WeibullHalf(ClaimModel):
    a: float

    family = "weibull-half"

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"Weibull scale must be > 0, got {self.a}")

    def ccdf(self, u):
        return _out(np.exp(-np.sqrt(_nonneg(u) / self.a)))

    def excess_ccdf(self, u):
        w = np.sqrt(_nonneg(u) / self.a)
        return _out((1.0 + w) * np.exp(-w))

    def moments(self) -> MomentSet:
        # E U^n = a^n Gamma(1 + 2n)
        return MomentSet(*(self.a**n * math.gamma(1 + 2 * n) for n in (1, 2, 3)))

    def params(self) -> dict:
        return {"a": self.a}


@dataclass(frozen=True)
class Pareto(ClaimModel):
    alpha: float
    b: float

    family = "pareto"

    def __post_init__(self):
        if not (self.alpha > 0 and self.b > 0 and math.isfinite(self.alpha) and math.isfinite(self.b)):
            raise DomainError(f"Pareto requires alpha > 0 and b > 0, got ({self.alpha}, {self.b})")

    def ccdf(self, u):
        return _out((1.0 + self.b * _nonneg(u)) ** (-self.alpha))

    def excess_ccdf(self, u):
        self._require_finite_mean()
        return _out((1.0 + self.b * _nonneg(u)) ** (-(self.alpha - 1.0)))

    def raw_moment(self, n: int) -> float:
        if self.alpha <= n:
            return math.inf
        denom = self.b**n * math.prod(self.alpha - j for j in range(1, n + 1))
        return math.factorial(n) / denom

    def moments(self) -> MomentSet:
        return MomentSet(*(self.raw_moment(n) for n in (1, 2, 3)))

    def params(self) -> dict:
        return {"alpha": self.alpha, "b": self.b}


def claim_ccdf(model: ClaimModel, u):
    """Tail ``P(U > u)`` of the claim size."""
    return model.ccdf(u)


def excess_ccdf(model: ClaimModel, u):
    """Tail of the stationary excess distribution ``(1/E U) int_u^inf P(U > x) dx``."""
    return model.excess_ccdf(u)


def moments(model: ClaimModel) -> MomentSet:
    return model.moments()


def excess_tail_point(model: ClaimModel, level: float = 1e-4) -> float:
    """Point ``u`` where the excess tail falls to ``level``, by bisection."""
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    model._require_finite_mean()
    hi = max(model.mean(), 1e-12)
    while model.excess_ccdf(hi) > level:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("excess tail never reaches the requested level")
    lo = 0.0
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if model.excess_ccdf(mid) > level:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def model_from_params(family: str, **params) -> ClaimModel:
    """Build a model from its family name (``abate-whitt``, ``weibull-half``, ``pareto``)."""
    family = family.lower().replace("_", "-")
    try:
        if family == "abate-whitt":
            return AbateWhitt(float(params["mu"]))
        if family == "weibull-half":
            return WeibullHalf(float(params["a"]))
        if family == "pareto":
            return Pareto(float(params["alpha"]), float(params["b"]))
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc.args[0]!r} for family {family!r}") from None
    except TypeError:
        raise DomainError(f"invalid parameters for family {family!r}: {params}") from None
    raise DomainError(f"unknown claim family {family!r}")

