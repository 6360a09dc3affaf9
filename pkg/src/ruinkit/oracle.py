"""Reference values: the exact Abate-Whitt ruin probability, Monte Carlo and grid convolution.

Monte Carlo uses the geometric-sum representation of the maximum of the claim
surplus, ``M = X_1 + ... + X_N`` with ``P(N = n) = (1 - rho) rho^n`` and ``X_j``
drawn from the excess distribution, so ``psi(u) = P(M > u)``.

Random numbers come from numpy's Philox4x64 counter-based generator.  A run
with ``partitions = P`` spawns ``P`` child seeds from ``SeedSequence(seed)``;
partition ``p`` simulates its share of replications with the ``p``-th child.
The merged estimate depends only on ``(seed, P)``, not on how many threads ran
the partitions.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .distributions import AbateWhitt, ClaimModel, Pareto, WeibullHalf, zeta
from .errors import DomainError
from .pk import _check_rho

__all__ = [
    "exact_ruin_abate_whitt",
    "excess_inverse",
    "sample_excess",
    "McConfig",
    "McEstimate",
    "EmpiricalRuin",
    "simulate_maximum",
    "mc_ruin",
    "grid_convolve",
]

_CHUNK = 1 << 18


def exact_ruin_abate_whitt(mu: float, rho: float, u):
    """Exact ``psi(u)`` for Abate-Whitt claims with parameter ``mu`` at load ``rho``."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    rho = _check_rho(rho)
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0):
        raise DomainError("u must be non-negative")
    c = 0.5 * (1.0 + mu)
    d = math.sqrt(c * c - (1.0 - rho) * mu)
    v1, v2 = c + d, c - d
    out = rho / (v1 - v2) * (v1 * zeta(v2 * v2 * arr) - v2 * zeta(v1 * v1 * arr))
    out = np.clip(out, 0.0, rho)
    return float(out) if out.ndim == 0 else out


def _bisect_inverse(ccdf, target: np.ndarray, start: float) -> np.ndarray:
    """Solve ``ccdf(u) = target`` elementwise for a continuous decreasing tail."""
    hi = np.full(target.shape, start)
    for _ in range(2000):
        need = ccdf(hi) > target
        if not np.any(need):
            break
        hi = np.where(need, hi * 2.0, hi)
    lo = np.zeros(target.shape)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        above = ccdf(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 1e-10 * hi):
            break
    return 0.5 * (lo + hi)


def excess_inverse(model: ClaimModel, v, method: str = "auto"):
    """Inverse transform: the ``u`` with ``B0(u) = v`` for ``v`` in ``[0, 1)``.

    Pareto and Weibull have closed forms (the Weibull excess tail is
    ``(1 + w) e^{-w}`` with ``w = sqrt(u/a)``, inverted through the ``-1`` branch
    of Lambert's W); Abate-Whitt, or ``method="bisection"``, uses bisection.
    """
    model._require_finite_mean()
    varr = np.asarray(v, dtype=float)
    if np.any((varr < 0) | (varr >= 1)):
        raise DomainError("uniform variates must lie in [0, 1)")
    target = 1.0 - varr
    if method == "bisection" or (method == "auto" and isinstance(model, AbateWhitt)):
        out = _bisect_inverse(model.excess_ccdf, target, model.mean())
        out = np.where(varr == 0, 0.0, out)
    elif isinstance(model, Pareto):
        out = (target ** (-1.0 / (model.alpha - 1.0)) - 1.0) / model.b
    elif isinstance(model, WeibullHalf):
        # the argument reaches the branch point -1/e at v = 0, where rounding can push it past
        arg = np.maximum(-target / math.e, -1.0 / math.e)
        with np.errstate(invalid="ignore"):
            w = -1.0 - np.real(lambertw(arg, -1))
        w = np.where(varr == 0, 0.0, w)
        out = model.a * np.maximum(w, 0.0) ** 2
    else:
        raise DomainError(f"no inverse transform for {model!r}")
    return float(out) if np.ndim(out) == 0 else out


def sample_excess(model: ClaimModel, rng: np.random.Generator, size=None):
    """Draw from the excess distribution.

    The Weibull excess tail ``(1 + w) e^{-w}`` is the Gamma(2, 1) survival
    function in ``w = sqrt(u/a)``, so ``a W^2`` with ``W ~ Gamma(2, 1)`` is
    exact and avoids Lambert W.  Other families use inverse transform.
    """
    if isinstance(model, WeibullHalf):
        return model.a * rng.standard_gamma(2.0, size) ** 2
    return excess_inverse(model, rng.random(size))


@dataclass(frozen=True)
class McConfig:
    samples: int = 10**6
    seed: int = 0
    u_grid: tuple = (0.0,)
    partitions: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError("samples must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.partitions < 1:
            raise DomainError("partitions must be >= 1")
        grid = tuple(float(x) for x in self.u_grid)
        if any(x < 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("u_grid must be non-negative and strictly increasing")
        object.__setattr__(self, "u_grid", grid)


@dataclass(frozen=True)
class McEstimate:
    u_grid: np.ndarray
    estimate: np.ndarray
    half_width: np.ndarray  # 95% normal-approximation half-width


class EmpiricalRuin:
    """Empirical tail ``P(M > u)`` from simulated maxima."""

    def __init__(self, maxima):
        self.maxima = np.sort(np.asarray(maxima, dtype=float))
        self.n = self.maxima.size

    def __call__(self, u):
        arr = np.asarray(u, dtype=float)
        out = 1.0 - np.searchsorted(self.maxima, arr, side="right") / self.n
        return float(out) if out.ndim == 0 else out

    def half_width(self, u):
        p = np.asarray(self(u))
        out = 1.96 * np.sqrt(p * (1.0 - p) / self.n)
        return float(out) if out.ndim == 0 else out


def _simulate_partition(model, rho, n, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        m = min(_CHUNK, n - start)
        counts = rng.geometric(1.0 - rho, size=m) - 1
        draws = sample_excess(model, rng, int(counts.sum()))
        owner = np.repeat(np.arange(m), counts)
        out[start:start + m] = np.bincount(owner, weights=draws, minlength=m)
    return out


def simulate_maximum(model: ClaimModel, rho: float, samples: int, seed: int = 0,
                     partitions: int = 1, workers: int | None = None) -> EmpiricalRuin:
    """Simulate ``samples`` copies of ``M`` and return their empirical tail."""
    rho = _check_rho(rho)
    model._require_finite_mean()
    children = np.random.SeedSequence(int(seed)).spawn(partitions)
    sizes = [samples // partitions + (p < samples % partitions) for p in range(partitions)]
    jobs = [(model, rho, n, ss) for n, ss in zip(sizes, children)]
    if workers is None or workers <= 1 or partitions == 1:
        parts = [_simulate_partition(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _simulate_partition(*job), jobs))
    return EmpiricalRuin(np.concatenate(parts))


def mc_ruin(model: ClaimModel, rho: float, cfg: McConfig, workers: int | None = None) -> McEstimate:
    """Monte Carlo estimate of ``psi`` on ``cfg.u_grid`` with 95% half-widths."""
    emp = simulate_maximum(model, rho, cfg.samples, cfg.seed, cfg.partitions, workers)
    u = np.asarray(cfg.u_grid, dtype=float)
    return McEstimate(u, np.atleast_1d(emp(u)), np.atleast_1d(emp.half_width(u)))


def grid_convolve(cdf_a, cdf_b, grid) -> np.ndarray:
    """Stieltjes convolution ``(A * B)(u) = int_0^u A(u - x) dB(x)`` on a uniform grid from 0.

    ``A`` is averaged over each cell (trapezoidal rule) and an atom ``B(0)`` is
    honoured; the rule is symmetric in ``A`` and ``B``.  Error is ``O(h)`` at worst.
    """
    grid = np.asarray(grid, dtype=float)
    A = np.asarray(cdf_a, dtype=float)
    B = np.asarray(cdf_b, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or A.shape != grid.shape or B.shape != grid.shape:
        raise DomainError("cdfs must be tabulated on the same one-dimensional grid")
    steps = np.diff(grid)
    h = steps[0]
    if grid[0] != 0.0 or h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise DomainError("grid must be uniform and start at 0")
    a_mid = 0.5 * (A[:-1] + A[1:])
    dB = np.diff(B)
    out = A * B[0]
    out[1:] += np.convolve(a_mid, dB)[: grid.size - 1]
    return out
