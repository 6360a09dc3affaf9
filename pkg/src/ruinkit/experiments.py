"""Experiment harness: tables and figure data comparing ruin approximations.

Each experiment pairs a reference ruin probability (exact for Abate-Whitt,
Monte Carlo otherwise) with the spectral approximation and, where the claim
moments allow it, the heavy-tail and heavy-traffic approximations.

Maximum errors are measured on a grid that is extended until both the
reference and the approximation have dropped below the largest error seen so
far.  Both curves are non-increasing, so no larger error can occur beyond the
grid end.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classic import extended_bound, heavy_tail, heavy_traffic, matched_phases
from .distributions import AbateWhitt, ClaimModel
from .errors import DomainError, NumericError
from .oracle import exact_ruin_abate_whitt, simulate_maximum
from .pk import phases_for_bound, spectral_ruin

__all__ = [
    "KINDS",
    "ExperimentSpec",
    "ExperimentResult",
    "Reference",
    "reference_ruin",
    "auto_grid",
    "crossing",
    "measurement_grid",
    "run_experiment",
    "emit_figure_data",
    "write_csv",
    "max_threads",
]

KINDS = ("phases-impact", "bound-quality", "approx-comparison", "bound-matching", "single-query")


def max_threads() -> int:
    """Thread cap from ``RUINKIT_THREADS`` (default: number of CPUs)."""
    raw = os.environ.get("RUINKIT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise DomainError(f"RUINKIT_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    model: ClaimModel
    rhos: tuple = (0.7,)
    ks: tuple = ()
    delta: float | None = None
    u: tuple | None = None  # explicit grid; None means automatic
    grid_points: int = 500
    samples: int = 10**6
    seed: int = 0
    partitions: int = 1
    rounding: str = "ceil"  # phase matching rule for bound-matching

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        rhos = tuple(float(r) for r in np.atleast_1d(self.rhos))
        ks = tuple(int(k) for k in np.atleast_1d(self.ks)) if self.ks is not None else ()
        if not rhos or any(not 0 < r < 1 for r in rhos):
            raise DomainError("every rho must lie in (0, 1)")
        if any(k < 1 for k in ks):
            raise DomainError("phase counts must be positive")
        if self.delta is not None and not self.delta > 0:
            raise DomainError("delta must be positive")
        if self.kind == "phases-impact" and self.delta is not None:
            raise DomainError("phases-impact takes phase counts, not delta")
        if self.kind in ("bound-quality", "single-query") and bool(ks) == (self.delta is not None):
            raise DomainError(f"{self.kind} needs exactly one of k or delta")
        if self.kind == "approx-comparison" and ks and self.delta is not None:
            raise DomainError("approx-comparison takes k or delta, not both")
        if self.kind == "single-query" and not self.u:
            raise DomainError("single-query needs explicit u values")
        u = None
        if self.u is not None:
            u = tuple(float(x) for x in np.atleast_1d(self.u))
            if any(x < 0 for x in u):
                raise DomainError("u values must be non-negative")
        if self.rounding not in ("ceil", "nearest"):
            raise DomainError("rounding must be 'ceil' or 'nearest'")
        if self.grid_points < 4:
            raise DomainError("grid_points must be at least 4")
        object.__setattr__(self, "rhos", rhos)
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "u", u)


@dataclass
class ExperimentResult:
    columns: list
    rows: list
    summary_columns: list
    summary: list
    notes: list = field(default_factory=list)

    def column(self, name):
        return np.array([np.nan if r[name] is None else r[name] for r in self.rows], dtype=float)


# -- references and grids -----------------------------------------------------

class Reference:
    """Reference ruin probability with a 95% half-width (zero when exact)."""

    def __init__(self, fn, half_width=None, kind="exact"):
        self._fn = fn
        self._hw = half_width
        self.kind = kind

    def __call__(self, u):
        return self._fn(u)

    def half_width(self, u):
        if self._hw is None:
            return np.zeros_like(np.asarray(u, dtype=float))
        return self._hw(u)


def reference_ruin(model: ClaimModel, rho: float, samples: int = 10**6, seed: int = 0,
                   partitions: int = 1, workers: int | None = None) -> Reference:
    if isinstance(model, AbateWhitt):
        return Reference(lambda u: exact_ruin_abate_whitt(model.mu, rho, u))
    emp = simulate_maximum(model, rho, samples, seed, partitions, workers)
    return Reference(emp, emp.half_width, kind="mc")


def auto_grid(u_end: float, n: int = 500) -> np.ndarray:
    """``0`` plus about ``n/2`` log-spaced and ``n/2`` linear points up to ``u_end``."""
    if not u_end > 0:
        return np.array([0.0])
    half = max(n // 2, 2)
    pts = np.concatenate(([0.0], np.geomspace(u_end * 1e-6, u_end, half), np.linspace(0.0, u_end, n - half)))
    return np.unique(pts)


def crossing(fn, level: float, tol: float = 1e-6) -> float:
    """Smallest ``u`` (to relative ``tol``) where the non-increasing ``fn`` is at most ``level``."""
    if fn(0.0) <= level:
        return 0.0
    hi = 1.0
    while fn(hi) > level:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError(f"function never drops to {level!r}")
    lo = 0.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if fn(mid) > level:
            lo = mid
        else:
            hi = mid
    return hi


def measurement_grid(ref, approx, level: float, n: int = 500):
    """Grid carrying the maximum of ``|ref - approx|``, and that maximum."""
    both = lambda u: max(float(ref(u)), float(approx(u)))
    level = min(level, 0.5 * both(0.0))
    grid = np.array([0.0])
    err = 0.0
    for _ in range(30):
        grid = np.union1d(grid, auto_grid(crossing(both, level), n))
        err = float(np.max(np.abs(np.asarray(ref(grid)) - np.asarray(approx(grid)))))
        if err >= level or err == 0.0:
            break
        level = err
    return grid, err


# -- experiments ---------------------------------------------------------------

def _child_seeds(seed: int, n: int) -> list:
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(int(seed)).spawn(n)]


def _references(spec: ExperimentSpec, workers: int) -> list:
    seeds = _child_seeds(spec.seed, len(spec.rhos))
    return [reference_ruin(spec.model, rho, spec.samples, s, spec.partitions, workers)
            for rho, s in zip(spec.rhos, seeds)]


def _optional(fn, notes, label):
    try:
        return fn()
    except DomainError as exc:
        note = f"{label}: n/a ({exc})"
        if note not in notes:
            notes.append(note)
        return None


def _pmap(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _ratio(bound, err):
    return bound / err if err > 0 else math.inf


def _phases_impact(spec, refs, workers):
    ks = spec.ks or (10, 20, 100)
    rows, summary = [], []
    cols = ["rho", "u", "psi_ref", "ref_half_width"]
    for k in ks:
        cols += [f"sa_k{k}", f"err_k{k}"]
    for rho, ref in zip(spec.rhos, refs):
        sols = _pmap(lambda k: spectral_ruin(spec.model, rho, k=k), list(ks), workers)
        if spec.u is not None:
            grid = np.asarray(spec.u)
        else:
            grid = np.array([0.0])
            for sol in sols:
                g, _ = measurement_grid(ref, sol, sol.delta, spec.grid_points)
                grid = np.union1d(grid, g)
        psi = np.atleast_1d(ref(grid))
        hw = np.atleast_1d(ref.half_width(grid))
        approx = [np.atleast_1d(sol(grid)) for sol in sols]
        for i, u in enumerate(grid):
            row = {"rho": rho, "u": float(u), "psi_ref": float(psi[i]), "ref_half_width": float(hw[i])}
            for k, a in zip(ks, approx):
                row[f"sa_k{k}"] = float(a[i])
                row[f"err_k{k}"] = float(abs(psi[i] - a[i]))
            rows.append(row)
        for k, sol, a in zip(ks, sols, approx):
            err = float(np.max(np.abs(psi - a)))
            summary.append({"rho": rho, "k": k, "epsilon": sol.epsilon, "bound": sol.delta,
                            "max_error": err, "ratio": _ratio(sol.delta, err)})
    return ExperimentResult(cols, rows, ["rho", "k", "epsilon", "bound", "max_error", "ratio"], summary)


def _bound_quality(spec, refs, workers):
    cells = []
    for rho, ref in zip(spec.rhos, refs):
        ks = spec.ks or (phases_for_bound(spec.delta, rho),)
        cells += [(rho, ref, k) for k in ks]

    def run(cell):
        rho, ref, k = cell
        sol = spectral_ruin(spec.model, rho, k=k)
        if spec.u is not None:
            grid = np.asarray(spec.u)
        else:
            grid, _ = measurement_grid(ref, sol, sol.delta, spec.grid_points)
        return rho, ref, k, sol, grid

    rows, summary = [], []
    for rho, ref, k, sol, grid in _pmap(run, cells, workers):
        psi = np.atleast_1d(ref(grid))
        hw = np.atleast_1d(ref.half_width(grid))
        approx = np.atleast_1d(sol(grid))
        err = np.abs(psi - approx)
        for i, u in enumerate(grid):
            rows.append({"rho": rho, "k": k, "u": float(u), "psi_ref": float(psi[i]),
                         "ref_half_width": float(hw[i]), "psi_spectral": float(approx[i]),
                         "abs_error": float(err[i]), "bound": sol.delta})
        summary.append({"rho": rho, "k": k, "epsilon": sol.epsilon, "bound": sol.delta,
                        "max_error": float(err.max()), "ratio": _ratio(sol.delta, float(err.max()))})
    cols = ["rho", "k", "u", "psi_ref", "ref_half_width", "psi_spectral", "abs_error", "bound"]
    return ExperimentResult(cols, rows, ["rho", "k", "epsilon", "bound", "max_error", "ratio"], summary)


def _comparison(spec, refs, workers, figure=False):
    delta = spec.delta if spec.delta is not None or spec.ks else 0.02
    model = spec.model
    rows, summary, notes = [], [], []
    for rho, ref in zip(spec.rhos, refs):
        k = spec.ks[0] if spec.ks else phases_for_bound(delta, rho)
        sol = spectral_ruin(model, rho, k=k)
        level = delta if delta is not None else sol.delta
        if spec.u is not None:
            grid = np.asarray(spec.u)
        else:
            # display range: where the reference still exceeds the bound level
            grid = auto_grid(crossing(ref, level), spec.grid_points)
        psi = np.atleast_1d(ref(grid))
        hw = np.atleast_1d(ref.half_width(grid))
        sa = np.atleast_1d(sol(grid))
        tail = _optional(lambda: np.atleast_1d(heavy_tail(model, rho, grid)), notes, "psi_tail")
        traffic = _optional(lambda: np.atleast_1d(heavy_traffic(model, rho, grid)), notes, "psi_traffic")
        for i, u in enumerate(grid):
            row = {"rho": rho, "k": k, "u": float(u), "psi_ref": float(psi[i]),
                   "ref_half_width": float(hw[i]), "psi_spectral": float(sa[i]),
                   "psi_tail": None if tail is None else float(tail[i]),
                   "psi_traffic": None if traffic is None else float(traffic[i]),
                   "delta": level}
            if not figure:
                row["err_spectral"] = float(abs(psi[i] - sa[i]))
                row["err_tail"] = None if tail is None else float(abs(psi[i] - tail[i]))
                row["err_traffic"] = None if traffic is None else float(abs(psi[i] - traffic[i]))
            rows.append(row)
        summary.append({
            "rho": rho, "k": k, "bound": sol.delta,
            "max_err_spectral": float(np.max(np.abs(psi - sa))),
            "max_err_tail": None if tail is None else float(np.max(np.abs(psi - tail))),
            "max_err_traffic": None if traffic is None else float(np.max(np.abs(psi - traffic))),
        })
    cols = ["rho", "k", "u", "psi_ref", "ref_half_width", "psi_spectral", "psi_tail", "psi_traffic", "delta"]
    if not figure:
        cols += ["err_spectral", "err_tail", "err_traffic"]
    scols = ["rho", "k", "bound", "max_err_spectral", "max_err_tail", "max_err_traffic"]
    return ExperimentResult(cols, rows, scols, summary, notes)


def _bound_matching(spec, refs, workers):
    model = spec.model
    notes = []
    table = []
    for rho, ref in zip(spec.rhos, refs):
        ht_bound = _optional(lambda: extended_bound(model, rho), notes, "ht_bound")
        row = {"rho": rho, "ht_bound": ht_bound, "k_star": None, "sp_bound": None,
               "max_ht_error": None, "max_sp_error": None}
        if ht_bound is not None:
            k = matched_phases(model, rho, spec.rounding)
            sol = spectral_ruin(model, rho, k=k)
            ht = lambda u: heavy_traffic(model, rho, u)
            if spec.u is not None:
                grid = np.asarray(spec.u)
            else:
                g1, _ = measurement_grid(ref, sol, sol.delta, spec.grid_points)
                g2, _ = measurement_grid(ref, ht, ht_bound, spec.grid_points)
                grid = np.union1d(g1, g2)
            psi = np.atleast_1d(ref(grid))
            row.update(k_star=k, sp_bound=sol.delta,
                       max_ht_error=float(np.max(np.abs(psi - np.atleast_1d(ht(grid))))),
                       max_sp_error=float(np.max(np.abs(psi - np.atleast_1d(sol(grid))))))
        table.append(row)
    cols = ["rho", "ht_bound", "k_star", "sp_bound", "max_ht_error", "max_sp_error"]
    return ExperimentResult(cols, table, cols, table, notes)


def _single_query(spec, workers):
    model = spec.model
    rows, summary, notes = [], [], []
    grid = np.asarray(spec.u)
    for rho in spec.rhos:
        sol = spectral_ruin(model, rho, k=spec.ks[0] if spec.ks else None, delta=spec.delta)
        sa = np.atleast_1d(sol(grid))
        tail = _optional(lambda: np.atleast_1d(heavy_tail(model, rho, grid)), notes, "psi_tail")
        traffic = _optional(lambda: np.atleast_1d(heavy_traffic(model, rho, grid)), notes, "psi_traffic")
        exact = None
        if isinstance(model, AbateWhitt):
            exact = np.atleast_1d(exact_ruin_abate_whitt(model.mu, rho, grid))
        elif "psi_exact: n/a (no closed form for this family)" not in notes:
            notes.append("psi_exact: n/a (no closed form for this family)")
        for i, u in enumerate(grid):
            rows.append({"rho": rho, "k": sol.k, "u": float(u), "psi_spectral": float(sa[i]),
                         "delta": sol.delta,
                         "psi_tail": None if tail is None else float(tail[i]),
                         "psi_traffic": None if traffic is None else float(traffic[i]),
                         "psi_exact": None if exact is None else float(exact[i])})
        summary.append({"rho": rho, "k": sol.k, "epsilon": sol.epsilon, "bound": sol.delta})
    cols = ["rho", "k", "u", "psi_spectral", "delta", "psi_tail", "psi_traffic", "psi_exact"]
    return ExperimentResult(cols, rows, ["rho", "k", "epsilon", "bound"], summary, notes)


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> ExperimentResult:
    """Run one experiment; the result is deterministic for a fixed spec (including seed)."""
    workers = max_threads() if workers is None else max(1, int(workers))
    if spec.kind == "single-query":
        return _single_query(spec, workers)
    refs = _references(spec, workers)
    if spec.kind == "phases-impact":
        return _phases_impact(spec, refs, workers)
    if spec.kind == "bound-quality":
        return _bound_quality(spec, refs, workers)
    if spec.kind == "approx-comparison":
        return _comparison(spec, refs, workers)
    return _bound_matching(spec, refs, workers)


def emit_figure_data(spec: ExperimentSpec, workers: int | None = None) -> ExperimentResult:
    """Curves ``(u, psi_ref, psi_spectral, psi_tail, psi_traffic, delta)`` for plotting.

    With an automatic grid the range stops where the reference drops to ``delta``.
    """
    workers = max_threads() if workers is None else max(1, int(workers))
    refs = _references(spec, workers)
    return _comparison(spec, refs, workers, figure=True)


# -- output --------------------------------------------------------------------

def _fmt(value, digits):
    if value is None:
        return "n/a"
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}g}"


def write_csv(columns, rows, dest=None, digits: int = 6) -> str:
    """Write rows as CSV (header row, '.' decimals); returns the text as well."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c), digits) for c in columns])
    text = buf.getvalue()
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
    return text
