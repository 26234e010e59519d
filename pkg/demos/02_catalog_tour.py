"""The model-group catalog: brackets, Koszul connections, curvatures.

Each catalog entry stores structure constants in an orthонormal basis and
derives its Levi-Civita connection by the Koszul formula; this script
prints the famous constants and the constant-curvature checks.
"""

import numpy as np

from spinorforge import (curvature, e_kappa_tau, h2xr, hn, s3,
                         sectional_curvature, sol3, torsion_residual,
                         unimodular)

rng = np.random.default_rng(1)

print("Sol_3 connection constants (orthonormal frame):")
alg = sol3()
for (i, j, k) in np.ndindex(3, 3, 3):
    if alg.gamma[i, j, k]:
        print(f"  Gamma[{i+1}{j+1}]^{k+1} = {alg.gamma[i, j, k]:+g}")

print("\nH^2 x R keeps a single pair:")
alg = h2xr()
for (i, j, k) in np.ndindex(3, 3, 3):
    if alg.gamma[i, j, k]:
        print(f"  Gamma[{i+1}{j+1}]^{k+1} = {alg.gamma[i, j, k]:+g}")

print("\nS^3 has bracket 2 X x Y and unit curvature:")
alg = s3()
X, Y = rng.normal(size=3), rng.normal(size=3)
print("  torsion residual:", np.max(np.abs(torsion_residual(alg, X, Y))))
print("  sectional curvature:", sectional_curvature(alg, X, Y))

print("\nH^n is a space form of curvature -|l|^2:")
for n in (2, 3, 4):
    alg = hn(n)
    X, Y = rng.normal(size=n), rng.normal(size=n)
    print(f"  n={n}: K = {sectional_curvature(alg, X, Y):+.12f}")

print("\nE(kappa, tau) and the unimodular family share one connection form:")
kappa, tau = 4.0, 1.0
print("  E(4, 1) vs unimodular(1, 1, 1) connection difference:",
      np.max(np.abs(e_kappa_tau(kappa, tau).gamma - unimodular(1, 1, 1).gamma)))

print("\ncurvature operators are skew and antisymmetric in (X, Y):")
X, Y = rng.normal(size=3), rng.normal(size=3)
R = curvature(sol3(), X, Y)
print("  ||R + R^T|| =", np.max(np.abs(R.matrix + R.matrix.T)))
