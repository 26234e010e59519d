"""Metric Lie algebras in an orthonormal basis, with the Koszul connection.

The metric is always the identity in the distinguished basis: a general
left-invariant metric is handled by absorbing it into the choice of basis.
Structure constants are stored densely, c[i, j, k] meaning

    [e_i, e_j] = sum_k c[i, j, k] e_k,

and the Levi-Civita connection coefficients gamma[i, j, k] likewise,
Gamma(e_i) e_j = sum_k gamma[i, j, k] e_k, produced by the Koszul formula

    <Gamma(X) Y, Z> = (<[X,Y],Z> + <[Z,X],Y> - <[Y,Z],X>) / 2.

The catalog covers the models used downstream: abelian R^n, the hyperbolic
group H^n with bracket l(X)Y - l(Y)X, the unit quaternions S^3 with bracket
2 X x Y, E(kappa, tau) with tau != 0, plane-by-line semi-direct products
R^2 x_A R (Sol_3 and H^2 x R as named instances), and the 3D unimodular
family with diagonalized connection constants mu_1, mu_2, mu_3.
"""

import numpy as np

from .clifford import MAX_DIM, SkewOperator, bivector_of_skew

JACOBI_TOL = 1e-12


# =============================================================================
# Core type
# =============================================================================

class MetricLieAlgebra:
    """Orthonormal-frame Lie algebra data: structure constants + connection."""

    __slots__ = ("n", "c", "gamma", "catalog_tag", "params")

    def __init__(self, c, catalog_tag="custom", params=None, gamma=None):
        c = np.array(c, dtype=np.float64)
        n = c.shape[0]
        if c.shape != (n, n, n) or not 1 <= n <= MAX_DIM:
            raise ValueError(f"structure constants must be (n,n,n), n<=8; got {c.shape}")
        if not np.array_equal(c, -np.swapaxes(c, 0, 1)):
            raise ValueError("structure constants are not antisymmetric in (i, j)")
        jac = jacobi_residual(c)
        if jac > JACOBI_TOL:
            raise ValueError(f"Jacobi identity violated: residual {jac:.3e}")
        c.flags.writeable = False
        self.n = n
        self.c = c
        self.catalog_tag = catalog_tag
        self.params = dict(params or {})
        if gamma is None:
            gamma = koszul_connection(self)
        else:
            gamma = np.array(gamma, dtype=np.float64)
        gamma.flags.writeable = False
        self.gamma = gamma

    # ---- pointwise algebra ------------------------------------------------
    def bracket(self, X, Y):
        return np.einsum("i,j,ijk->k", np.asarray(X, float), np.asarray(Y, float),
                         self.c)

    def gamma_op(self, X):
        """Matrix of Y -> Gamma(X) Y in the distinguished basis."""
        return np.einsum("i,ijk->kj", np.asarray(X, float), self.gamma)

    def connection(self, X, Y):
        return np.einsum("i,j,ijk->k", np.asarray(X, float), np.asarray(Y, float),
                         self.gamma)

    def __repr__(self):
        return f"MetricLieAlgebra(n={self.n}, tag={self.catalog_tag!r})"


def jacobi_residual(c):
    """Max-norm of the cyclic sum [[e_i,e_j],e_k] + cycles."""
    c = np.asarray(c, dtype=np.float64)
    d = np.einsum("ijl,lkm->ijkm", c, c)
    cyc = d + np.einsum("jkim->ijkm", d) + np.einsum("kijm->ijkm", d)
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


# =============================================================================
# Connection, torsion, curvature
# =============================================================================

def koszul_connection(alg):
    """Connection coefficients from the structure constants.

    gamma[i,j,k] = (c[i,j,k] + c[k,i,j] - c[j,k,i]) / 2; skew in (j, k)
    exactly because c is exactly antisymmetric in its first two slots.
    """
    c = alg.c if isinstance(alg, MetricLieAlgebra) else np.asarray(alg, float)
    return 0.5 * (c + np.einsum("kij->ijk", c) - np.einsum("jki->ijk", c))


def torsion_residual(alg, X, Y):
    """Gamma(X)Y - Gamma(Y)X - [X, Y]; identically zero for the Levi-Civita
    connection, returned as a vector so tests can assert it."""
    return alg.connection(X, Y) - alg.connection(Y, X) - alg.bracket(X, Y)


def curvature(alg, X, Y):
    """R(X,Y) = [Gamma(X), Gamma(Y)] - Gamma([X,Y]) as a SkewOperator.

    The commutator is formed as P - P^T with P = Gamma(X) @ Gamma(Y), which
    is exactly antisymmetric in floating point and mathematically equal to
    the commutator of the two (skew) connection operators.
    """
    P = alg.gamma_op(X) @ alg.gamma_op(Y)
    m = P - P.T - alg.gamma_op(alg.bracket(X, Y))
    return SkewOperator(m)


def sectional_curvature(alg, X, Y, tol=1e-12):
    """K(X, Y) = <R(X,Y)Y, X> / (|X|^2 |Y|^2 - <X,Y>^2)."""
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    denom = X @ X * (Y @ Y) - (X @ Y) ** 2
    if denom <= tol:
        raise ValueError("degenerate plane: X and Y are parallel")
    return float(curvature(alg, X, Y)(Y) @ X) / denom


def gamma_as_bivector(alg, X):
    """Gamma(X) as a bivector of Cl_n; its half-commutator action on vectors
    recovers the matrix action of Gamma(X)."""
    return bivector_of_skew(alg.gamma_op(X))


# =============================================================================
# Catalog
# =============================================================================

def rn(n):
    """Abelian R^n."""
    return MetricLieAlgebra(np.zeros((n, n, n)), catalog_tag="Rn",
                            params={"n": n})


def hn(n, l=None):
    """The hyperbolic group H^n: [X, Y] = l(X) Y - l(Y) X.

    Default l is the e_n coordinate form; any nonzero l is accepted.
    Every left-invariant metric here has constant curvature -|l|^2.
    """
    if l is None:
        l = np.zeros(n)
        l[n - 1] = 1.0
    l = np.asarray(l, dtype=np.float64)
    if l.shape != (n,) or not np.any(l):
        raise ValueError("H^n requires a nonzero linear form l of length n")
    c = np.zeros((n, n, n))
    eye = np.eye(n)
    for i in range(n):
        for j in range(n):
            c[i, j] = l[i] * eye[j] - l[j] * eye[i]
    return MetricLieAlgebra(c, catalog_tag="Hn", params={"n": n, "l": l.tolist()})


def s3():
    """Unit quaternions: [X, Y] = 2 X x Y in a right-handed orthonormal basis."""
    c = np.zeros((3, 3, 3))
    for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 2.0
        c[j, i, k] = -2.0
    return MetricLieAlgebra(c, catalog_tag="S3", params={})


def e_kappa_tau(kappa, tau):
    """E(kappa, tau) with tau != 0: [e1,e2] = 2 tau e3, [e2,e3] = sigma e1,
    [e3,e1] = sigma e2 with sigma = kappa / (2 tau)."""
    if tau == 0:
        raise ValueError("E(kappa, tau) requires tau != 0; use h2xr()/semidirect "
                         "constructions for the tau = 0 geometries")
    sigma = kappa / (2.0 * tau)
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 2.0 * tau
    c[1, 0, 2] = -2.0 * tau
    c[1, 2, 0] = sigma
    c[2, 1, 0] = -sigma
    c[2, 0, 1] = sigma
    c[0, 2, 1] = -sigma
    return MetricLieAlgebra(c, catalog_tag="EKappaTau",
                            params={"kappa": kappa, "tau": tau, "sigma": sigma})


def semidirect(A, catalog_tag="SemiDirect"):
    """R^2 x_A R: [e3,e1] = a e1 + c e2, [e3,e2] = b e1 + d e2, [e1,e2] = 0."""
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (2, 2):
        raise ValueError("semidirect products take a 2x2 matrix")
    (a, b), (cc, d) = A
    c = np.zeros((3, 3, 3))
    c[2, 0, 0] = a
    c[2, 0, 1] = cc
    c[0, 2, 0] = -a
    c[0, 2, 1] = -cc
    c[2, 1, 0] = b
    c[2, 1, 1] = d
    c[1, 2, 0] = -b
    c[1, 2, 1] = -d
    return MetricLieAlgebra(c, catalog_tag=catalog_tag,
                            params={"A": A.tolist()})


def sol3():
    """Sol_3 = R^2 x_A R with A = diag(-1, 1)."""
    alg = semidirect(np.diag([-1.0, 1.0]), catalog_tag="Sol3")
    return alg


def h2xr():
    """H^2 x R = R^2 x_A R with a = 1, b = c = d = 0."""
    return semidirect(np.array([[1.0, 0.0], [0.0, 0.0]]), catalog_tag="H2xR")


def unimodular(mu1, mu2, mu3):
    """3D unimodular group with connection Gamma(X) = X1 mu1 e23 + X2 mu2 e31
    + X3 mu3 e12 in an orthonormal basis.

    The structure constants are recovered through torsion-freeness,
    [e_i, e_j] = Gamma(e_i) e_j - Gamma(e_j) e_i, giving the Milnor form
    [e1,e2] = (mu1+mu2) e3 and cyclic; building the algebra re-runs the
    Koszul formula, so the stated connection is validated on construction.
    """
    mus = (float(mu1), float(mu2), float(mu3))
    c = np.zeros((3, 3, 3))
    for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = mus[i] + mus[j]
        c[j, i, k] = -c[i, j, k]
    alg = MetricLieAlgebra(c, catalog_tag="Unimodular",
                           params={"mu": list(mus)})
    want = unimodular_gamma_matrix(mus, np.eye(3))
    got = np.stack([alg.gamma_op(e) for e in np.eye(3)], axis=0)
    if np.max(np.abs(got - want)) > 1e-14:
        raise AssertionError("unimodular connection does not match its defining form")
    return alg


def unimodular_gamma_matrix(mus, Xs):
    """Stacked Gamma(X) matrices of the unimodular family, straight from the
    diagonalized form (used as the construction-time cross-check)."""
    Xs = np.atleast_2d(np.asarray(Xs, float))
    out = np.zeros((Xs.shape[0], 3, 3))
    for r, X in enumerate(Xs):
        m = np.zeros((3, 3))
        m[2, 1] = X[0] * mus[0]
        m[1, 2] = -m[2, 1]
        m[0, 2] = X[1] * mus[1]
        m[2, 0] = -m[0, 2]
        m[1, 0] = X[2] * mus[2]
        m[0, 1] = -m[1, 0]
        out[r] = m
    return out


CATALOG = {
    "Rn": lambda params: rn(int(params["n"])),
    "Hn": lambda params: hn(int(params["n"]), params.get("l")),
    "S3": lambda params: s3(),
    "EKappaTau": lambda params: e_kappa_tau(float(params["kappa"]),
                                            float(params["tau"])),
    "SemiDirect": lambda params: semidirect(params["A"]),
    "Sol3": lambda params: sol3(),
    "H2xR": lambda params: h2xr(),
    "Unimodular": lambda params: unimodular(*map(float, params["mu"])),
}


def catalog_build(tag, params=None):
    """Build a catalog algebra by tag; params is the variant-specific dict."""
    if tag not in CATALOG:
        raise ValueError(f"unknown catalog tag {tag!r}; "
                         f"known: {sorted(CATALOG)}")
    return CATALOG[tag](params or {})


# =============================================================================
# JSON round trip
# =============================================================================

def algebra_to_dict(alg):
    return {
        "tag": alg.catalog_tag,
        "params": alg.params,
        "c": alg.c.tolist(),
        "gamma": alg.gamma.tolist(),
    }


def algebra_from_dict(d):
    return MetricLieAlgebra(np.array(d["c"]), catalog_tag=d.get("tag", "custom"),
                            params=d.get("params"), gamma=np.array(d["gamma"]))
