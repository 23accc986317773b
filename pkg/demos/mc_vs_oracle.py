"""Monte Carlo meets the deterministic oracles.

For linear sigma the second moment solves a closed Volterra equation; here
a few thousand Euler paths of each equation are averaged and compared with
the oracle energies, with delta-method error bars.

    python demos/mc_vs_oracle.py [replicates]
"""

import sys

from spdelab import GridSpec, InitialData, SigmaSpec, WaveConfig
from spdelab.analysis import HeatRun, WaveRun, estimate_energy_mc
from spdelab.solvers import solve_heat_moment_volterra, solve_wave_energy_volterra

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
sigma = SigmaSpec.linear(1.0)

nx = 80
spec = GridSpec(1.0, 0.3, nx, int(round(0.3 / (0.4 / nx**2))))
u0 = InitialData.constant(spec, 1.0)
curve = estimate_energy_mc(HeatRun(spec, "neumann", sigma, u0), [0.3], 1.0,
                           replicates=reps, seed=11)
orc = solve_heat_moment_volterra(spec, "neumann", 1.0, u0, 1.0, [0.3], n_steps=300)
p = curve.entries[0]
print(f"heat-Neumann t=0.3 lam=1: MC {p.energy:.5f} +- {p.stderr:.5f} "
      f"vs oracle {orc.energy(0.3):.5f} (z = {(p.energy-orc.energy(0.3))/p.stderr:+.2f})")

X, dx = 2.0, 0.01
nxw = int(2 * X / dx)
wspec = GridSpec(2 * X, 0.5, nxw, int(0.5 / dx))
wave = WaveConfig.indicator(X, nxw, 1.0)
wcurve = estimate_energy_mc(WaveRun(wspec, sigma, wave), [0.5], 1.0,
                            replicates=reps, seed=11)
worc = solve_wave_energy_volterra(wave, 1.0, 1.0, [0.5])
q = wcurve.entries[0]
print(f"wave        t=0.5 lam=1: MC {q.energy:.6f} +- {q.stderr:.6f} "
      f"vs oracle {worc.energy(0.5):.6f} (z = {(q.energy-worc.energy(0.5))/q.stderr:+.2f})")
