"""A tour of the Clifford layer: products, reversal, operators, spin lifts.

Everything downstream rests on one sign convention, X*Y + Y*X = -2<X,Y>,
and on the dictionary between skew operators and bivectors.  This script
walks through both with printed sanity checks.
"""

import numpy as np

from spinorforge import (Multivector, SkewOperator, adjoint_action,
                         bivector_of_skew, commutator, spin_bracket, spin_lift)

n = 3
e1 = Multivector.basis_vector(n, 0)
e2 = Multivector.basis_vector(n, 1)

print("generators square to -1:            e1*e1 =", e1 * e1)
print("generators anticommute:        e1*e2+e2*e1 =", e1 * e2 + e2 * e1)
print("reversal flips bivectors:        rev(e1*e2) =", (e1 * e2).reversal())

# a rotation generator and its bivector representative
u = SkewOperator([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
biv = bivector_of_skew(u)
print("\nrotation generator e1 -> e2 as a bivector:", biv)
x = np.array([0.3, -0.5, 0.9])
print("half-commutator action [biv, x]:", commutator(
    biv, Multivector.from_vector(x)).vector())
print("matrix action           u(x):   ", u(x))

# lifting a rotation to the spin group
theta = 0.7
T = np.array([[np.cos(theta), -np.sin(theta), 0.0],
              [np.sin(theta), np.cos(theta), 0.0],
              [0.0, 0.0, 1.0]])
a = spin_lift(T)
print("\nspin lift of a rotation by", theta, "->", a.value)
print("its adjoint action reproduces T to",
      np.max(np.abs(a.adjoint_matrix() - T)))
print("unitarity <<a, a>> =", spin_bracket(a.value, a.value))

print("\nadjoint action preserves norms:")
y = adjoint_action(a, Multivector.from_vector(x)).vector()
print("  |x| =", np.linalg.norm(x), " |Ad(a)x| =", np.linalg.norm(y))
