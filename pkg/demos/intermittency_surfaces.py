"""Tall peaks from multiplicative noise: simulate the multiplicative-noise
heat equation u_t = u_xx/2 + lam*u*xi on [0,1] (Dirichlet, u0 = sin(pi x))
at increasing noise levels and watch the path maxima explode.

Writes fields.csv per noise level (render with: plot surface --in ... --out ...).

    python demos/intermittency_surfaces.py [outdir]
"""

import sys

import numpy as np

from spdelab import GridSpec, InitialData, SigmaSpec
from spdelab.solvers import heat_em_reduce

outdir = sys.argv[1] if len(sys.argv) > 1 else "demo_out"

spec = GridSpec(L=1.0, T=1.0, nx=200, nt=50_000)
u0 = InitialData.sine(spec)
sigma = SigmaSpec.linear(1.0)
snaps = [round(k * 0.05, 10) for k in range(21)]

print("level   median max   90% max    (100 replicates each)")
for lam in (0.0, 0.1, 2.0):
    maxima = heat_em_reduce(spec, "dirichlet", sigma, u0, lam, 0.5, seed=77,
                            replicates=100, t_snapshots=[1.0], collect="max")
    print(f"lam={lam:<4g} {np.median(maxima):10.3f} {np.quantile(maxima, 0.9):10.3f}")

    # one representative path per level, in the fields.csv schema
    fields = heat_em_reduce(spec, "dirichlet", sigma, u0, lam, 0.5, seed=77,
                            replicates=1, t_snapshots=snaps, collect="fields")
    import os

    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"pam_fields_lam{lam:g}.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# spdelab pam\n# seed = 77 (source: demo)\n# lambda = {lam:.17g}\n")
        fh.write("t,x,value\n")
        xs = spec.x_nodes()
        for j, t in enumerate(snaps):
            for i, x in enumerate(xs):
                fh.write(f"{t:.17g},{x:.17g},{fields[0, j, i]:.17g}\n")
    print(f"        wrote {path}")

print("\nThe noise-free path decays like exp(-pi^2 t / 2); small noise barely")
print("perturbs it, while lam = 2 grows tall isolated peaks -- intermittency.")
