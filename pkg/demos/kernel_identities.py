"""The kernel facts the energy bounds stand on, checked numerically:

* the Neumann kernel conserves mass, the Dirichlet kernel loses it;
* int [p_s(y, .)]^2 = p_{2s}(y, y), the diagonal doubling identity;
* the resolvent bounds 1/(2 sqrt beta) (Dirichlet) and (3+eps)/sqrt(8 beta)
  (Neumann, beta above a computed threshold);
* Phi(tau) >= L sqrt(tau / 2 pi), the seed of the exp(c lambda^4) lower rate.

    python demos/kernel_identities.py
"""

import math

from spdelab import (
    DIRICHLET,
    NEUMANN,
    KernelParams,
    diagonal_double_time,
    kernel_mass,
    phi_integral,
    resolvent_check,
)

pD = KernelParams(1.0, DIRICHLET)
pN = KernelParams(1.0, NEUMANN)

print("mass of p_t(x, .) at x = 0.5:")
for t in (1e-3, 0.01, 0.1, 1.0):
    print(f"  t={t:<6g} Neumann {kernel_mass(pN, t, 0.5):.12f}   "
          f"Dirichlet {kernel_mass(pD, t, 0.5):.12f}")

print("\ndiagonal doubling p_2s(y,y) and its free-space floor (8 pi s)^(-1/2):")
for s in (0.01, 0.1, 1.0, 50.0):
    print(f"  s={s:<5g} p_2s(0.3,0.3) = {diagonal_double_time(pN, s, 0.3):.6f}   "
          f"floor {1/math.sqrt(8*math.pi*s):.6f}")

print("\nresolvent bounds:")
for beta in (10.0, 100.0, 1000.0):
    rd = resolvent_check(pD, beta, 1.0)
    rn = resolvent_check(pN, beta, 5.0, eps=1.0)
    print(f"  beta={beta:<6g} D: {rd.lhs:.5f} <= {rd.bound:.5f}   "
          f"N: {rn.lhs:.5f} <= {rn.bound:.5f} (threshold {rn.threshold:.3f})")

print("\nPhi(tau) against its lower bound L sqrt(tau / 2 pi):")
for tau in (0.01, 0.1, 1.0):
    print(f"  tau={tau:<5g} Phi = {phi_integral(pN, tau):.6f} >= "
          f"{math.sqrt(tau/(2*math.pi)):.6f}")
