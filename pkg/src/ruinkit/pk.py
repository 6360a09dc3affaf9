"""Closed-form ruin probability for hyperexponential excess distributions.

With ``L(s)`` the transform of a ``k``-phase hyperexponential excess
distribution, the maximum ``M`` of the claim surplus satisfies

    E exp(-s M) = 1 - rho + rho * sum_i R_i eta_i / (eta_i + s),

where ``-eta_i`` are the ``k`` real solutions of ``rho L(s) = 1``.  Each
``eta_i`` sits strictly inside ``(rate_{i-1}, rate_i)`` (with ``rate_0 = 0``),
so bisection on those brackets always succeeds.  The ruin probability is then
``psi(u) = rho * sum_i R_i exp(-eta_i u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ClaimModel
from .errors import DomainError, NumericError
from .spectral import HyperExp, fit_hyperexp

__all__ = [
    "RuinSolution",
    "hyperexp_lt",
    "solve_roots",
    "residues",
    "solve",
    "ruin_spectral",
    "certified_bound",
    "phases_for_bound",
    "spectral_ruin",
]

_POLE_OFFSET = 1e-9
_MERGE_TOL = 1e-12


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise DomainError(f"load rho must lie in (0, 1), got {rho}")
    return rho


def hyperexp_lt(hx: HyperExp, s):
    """Transform ``sum_i w_i rate_i / (rate_i + s)`` on the real axis ``s >= 0``."""
    if np.any(np.asarray(s) < 0):
        raise DomainError("the transform is evaluated for s >= 0 only")
    return hx.laplace(s)


def _merge_close_rates(hx: HyperExp) -> HyperExp:
    rates, weights = list(hx.rates[:1]), list(hx.weights[:1])
    for lam, w in zip(hx.rates[1:], hx.weights[1:]):
        if lam - rates[-1] < _MERGE_TOL * rates[-1]:
            weights[-1] += w
        else:
            rates.append(lam)
            weights.append(w)
    if len(rates) == hx.k:
        return hx
    weights = np.asarray(weights)
    return HyperExp(np.asarray(rates), weights / weights.sum(), hx.epsilon)


def _char(x, rates, weights, rho):
    # 1 - rho * L(-x), vectorised over x
    return 1.0 - rho * (rates / (rates - x[:, None])) @ weights


def solve_roots(hx: HyperExp, rho: float) -> np.ndarray:
    """The ``k`` positive ``eta`` with ``rho * L(-eta) = 1``, in increasing order."""
    rho = _check_rho(rho)
    rates, weights = hx.rates, hx.weights
    left = np.concatenate(([0.0], rates[:-1]))
    right = rates.copy()
    width = right - left
    lo = left + _POLE_OFFSET * width
    hi = right - _POLE_OFFSET * width
    f_lo = _char(lo, rates, weights, rho)
    f_hi = _char(hi, rates, weights, rho)
    bad = ~((f_lo > 0) & (f_hi < 0))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NumericError(f"no sign change of 1 - rho L(-x) on ({left[i]!r}, {right[i]!r})")
    # the characteristic function decreases on every bracket
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        # stop once no midpoint can be represented strictly inside its bracket
        if np.all((mid <= lo) | (mid >= hi)):
            break
        pos = _char(mid, rates, weights, rho) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    eta = 0.5 * (lo + hi)
    if not (np.all(eta > left) and np.all(eta < right)):
        raise NumericError("roots do not interlace the rates")
    return eta


def residues(hx: HyperExp, rho: float, etas) -> np.ndarray:
    """Coefficients ``R_i`` of ``M_+`` from the residues at ``s = -eta_i``.

    ``R_i = (1 - rho) / (rho^2 eta_i D_i)`` with ``D_i = sum_j w_j rate_j / (rate_j - eta_i)^2``,
    the exact derivative of the transform at the pole.
    """
    rho = _check_rho(rho)
    etas = np.asarray(etas, dtype=float)
    rates, weights = hx.rates, hx.weights
    deriv = (rates / (rates - etas[:, None]) ** 2) @ weights
    R = (1.0 - rho) / (rho * rho * etas * deriv)
    if abs(R.sum() - 1.0) > 1e-8:
        raise NumericError(f"residues sum to {R.sum()!r}, root set is inconsistent")
    return R


@dataclass(frozen=True)
class RuinSolution:
    """Spectral approximation ``psi(u) = rho sum_i R_i exp(-eta_i u)`` with its bound ``delta``."""

    rho: float
    decay_rates: np.ndarray
    coefficients: np.ndarray
    epsilon: float
    delta: float

    def __post_init__(self):
        for name in ("decay_rates", "coefficients"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.decay_rates.size

    def __call__(self, u):
        return ruin_spectral(self, u)

    def laplace(self, s):
        """Transform ``E exp(-s M)`` of the approximating maximum."""
        s = np.asarray(s, dtype=float)
        eta = self.decay_rates
        out = 1.0 - self.rho + self.rho * (eta / np.add.outer(s, eta)) @ self.coefficients
        return float(out) if out.ndim == 0 else out


def solve(hx: HyperExp, rho: float) -> RuinSolution:
    """Decay rates and coefficients of the ruin probability for excess law ``hx``."""
    rho = _check_rho(rho)
    merged = _merge_close_rates(hx)
    etas = solve_roots(merged, rho)
    R = residues(merged, rho, etas)
    eps = hx.epsilon
    delta = certified_bound(eps, rho) if 0 < eps < 1 else math.nan
    return RuinSolution(rho, etas, R, eps, delta)


def ruin_spectral(sol: RuinSolution, u):
    """Ruin probability ``P(M > u)`` of the approximating model."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0):
        raise DomainError("u must be non-negative")
    out = sol.rho * (np.exp(-np.multiply.outer(arr, sol.decay_rates)) @ sol.coefficients)
    out = np.clip(out, 0.0, sol.rho)
    return float(out) if out.ndim == 0 else out


def certified_bound(epsilon: float, rho: float) -> float:
    """Uniform error bound ``epsilon * rho / (1 - rho)`` on the ruin probability."""
    rho = _check_rho(rho)
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon * rho / (1.0 - rho)


def phases_for_bound(delta: float, rho: float) -> int:
    """Smallest ``k`` whose certified bound ``rho / ((k+1)(1-rho))`` is at most ``delta``."""
    rho = _check_rho(rho)
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    x = rho / ((1.0 - rho) * delta)
    # x is often an integer in exact arithmetic (e.g. 450); absorb rounding noise
    n = math.ceil(x * (1.0 - 1e-12))
    return max(n - 1, 1)


def spectral_ruin(model: ClaimModel, rho: float, k: int | None = None,
                  delta: float | None = None) -> RuinSolution:
    """Fit and solve in one step; give exactly one of ``k`` or ``delta``."""
    if (k is None) == (delta is None):
        raise DomainError("give exactly one of k or delta")
    if k is None:
        k = phases_for_bound(delta, rho)
    return solve(fit_hyperexp(model, k), rho)
