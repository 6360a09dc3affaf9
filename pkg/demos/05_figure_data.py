"""
Curves for a plot: exact, spectral, heavy-tail and heavy-traffic ruin
probabilities on one grid, written as CSV. Any plotting tool can read it.
"""

import sys
from pathlib import Path

from ruinkit import AbateWhitt, ExperimentSpec, WeibullHalf, emit_figure_data
from ruinkit.experiments import write_csv

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figure_data")
out.mkdir(exist_ok=True)

for name, model, rho in [("aw_rho09", AbateWhitt(2.0), 0.9), ("weibull_rho07", WeibullHalf(3.0), 0.7)]:
    res = emit_figure_data(ExperimentSpec("approx-comparison", model, rhos=(rho,), delta=0.02, samples=10**5))
    path = out / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        write_csv(res.columns, res.rows, fh)
    u = res.column("u")
    print(f"{path}: {len(res.rows)} rows, u up to {u[-1]:.4g}")
    for note in res.notes:
        print("  note:", note)
