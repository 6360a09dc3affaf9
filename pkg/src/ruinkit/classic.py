"""Heavy-traffic and heavy-tail approximations of the ruin probability.

The heavy-traffic approximation replaces the maximum ``M`` by an exponential
with the same mean ``E M = rho E U^2 / (2 (1 - rho) E U)``.  By default the
variant with an atom of mass ``1 - rho`` at zero, ``rho exp(-rho u / E M)``,
is used; it keeps the mean ``E M``.  Brown's bound on the plain exponential
needs a finite third moment, via ``gamma = 2 E U^3 E U / (3 (E U^2)^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ClaimModel
from .errors import DomainError
from .pk import _check_rho, phases_for_bound

__all__ = [
    "HeavyTrafficParams",
    "heavy_traffic_params",
    "heavy_traffic",
    "heavy_tail",
    "brown_gamma",
    "brown_bound",
    "extended_bound",
    "matched_phases",
]


@dataclass(frozen=True)
class HeavyTrafficParams:
    rho: float
    mean_M: float
    gamma: float  # math.inf when E U^3 diverges


def heavy_traffic_params(model: ClaimModel, rho: float) -> HeavyTrafficParams:
    rho = _check_rho(rho)
    m1, m2, m3 = model.moments()
    if not math.isfinite(m2):
        raise DomainError(f"heavy traffic needs a finite second moment; {model!r} has none")
    mean_M = rho * m2 / (2.0 * (1.0 - rho) * m1)
    gamma = 2.0 * m3 * m1 / (3.0 * m2 * m2) if math.isfinite(m3) else math.inf
    return HeavyTrafficParams(rho, mean_M, gamma)


def heavy_traffic(model: ClaimModel, rho: float, u, atom: bool = True):
    """``rho exp(-rho u / E M)``, or ``exp(-u / E M)`` when ``atom`` is false."""
    p = heavy_traffic_params(model, rho)
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0):
        raise DomainError("u must be non-negative")
    if atom:
        out = p.rho * np.exp(-p.rho * arr / p.mean_M)
    else:
        out = np.exp(-arr / p.mean_M)
    return float(out) if out.ndim == 0 else out


def heavy_tail(model: ClaimModel, rho: float, u):
    """``rho / (1 - rho) * B0bar(u)``.  Not clamped: values above one are returned as is."""
    rho = _check_rho(rho)
    out = rho / (1.0 - rho) * np.asarray(model.excess_ccdf(u))
    return float(out) if out.ndim == 0 else out


def brown_gamma(model: ClaimModel) -> float:
    m1, m2, m3 = model.moments()
    if not math.isfinite(m3):
        raise DomainError(f"a finite third moment is required; {model!r} has none")
    return 2.0 * m3 * m1 / (3.0 * m2 * m2)


def brown_bound(model: ClaimModel, rho: float) -> float:
    """Sup-norm distance bound ``(1 - rho) max(2 gamma, gamma / rho)`` between M and Exp(1/E M)."""
    rho = _check_rho(rho)
    g = brown_gamma(model)
    return (1.0 - rho) * max(2.0 * g, g / rho)


def extended_bound(model: ClaimModel, rho: float) -> float:
    """Bound for the atom-adjusted heavy-traffic approximation: Brown's bound plus ``1 - rho``."""
    return brown_bound(model, rho) + (1.0 - rho)


def matched_phases(model: ClaimModel, rho: float, rounding: str = "ceil") -> int:
    """Phase count whose spectral bound matches :func:`extended_bound`.

    ``"ceil"`` gives the fewest phases whose bound does not exceed it;
    ``"nearest"`` picks the count whose bound is closest to it, which may sit slightly above.
    """
    if rounding == "ceil":
        return phases_for_bound(extended_bound(model, rho), rho)
    if rounding != "nearest":
        raise DomainError(f"rounding must be 'ceil' or 'nearest', got {rounding!r}")
    x = rho / ((1.0 - rho) * extended_bound(model, rho))
    return max(round(x) - 1, 1)
