"""
How loose is the certified bound? Abate-Whitt claims have an exact ruin
probability, so the true worst-case error of the spectral answer can be
measured and set against delta = eps * rho / (1 - rho).
"""

from ruinkit import AbateWhitt, ExperimentSpec, run_experiment

model = AbateWhitt(2.0)

# fixed phase counts
res = run_experiment(ExperimentSpec("bound-quality", model, rhos=(0.1, 0.5, 0.9), ks=(10, 20, 100)))
print(f"{'rho':>5} {'k':>5} {'bound':>9} {'max err':>10} {'ratio':>7}")
for r in res.summary:
    print(f"{r['rho']:5.2f} {r['k']:5d} {r['bound']:9.5f} {r['max_error']:10.6f} {r['bound'] / r['max_error']:7.2f}")

# or ask for a target bound and let the phase count follow
print("\ntarget delta = 0.02")
res = run_experiment(ExperimentSpec("bound-quality", model, rhos=(0.1, 0.5, 0.9), delta=0.02))
for r in res.summary:
    print(f"rho={r['rho']:.1f}  k={r['k']:4d}  bound={r['bound']:.5f}  max err={r['max_error']:.6f}")
