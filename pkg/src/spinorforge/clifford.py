"""Dense real Clifford algebras Cl_n with the convention e_i^2 = -1.

A multivector of the rank-n algebra is a dense coefficient array of length
2**n indexed by basis-blade bitmask: bit g of the index set means the blade
contains the generator e_{g+1}, generators ordered ascending.  The single
global sign convention, used by every other module, is

    X * Y + Y * X = -2 <X, Y>   for vectors X, Y      (so e_i * e_i = -1).

Blade product signs are precomputed once per algebra by per-bit popcount
counting (anticommutation swaps plus one factor -1 per contracted pair).
n is capped at 8, i.e. 256 coefficients; everything is plain float64 numpy
and the low-level kernels broadcast over leading axes so that fields of
multivectors (grids) go through the same code path.

Multivectors are immutable values; all operations return new objects.
"""

import math
from functools import lru_cache

import numpy as np

MAX_DIM = 8


# =============================================================================
# Blade tables
# =============================================================================

def _popcount(idx):
    idx = np.asarray(idx)
    return np.array([bin(int(i)).count("1") for i in idx.ravel()],
                    dtype=np.int64).reshape(idx.shape)


@lru_cache(maxsize=None)
def blade_tables(n):
    """Sign table and grade table of Cl_n.

    Returns (signs, grades) where signs[i, j] is the sign of blade_i * blade_j
    (the product blade index is always i ^ j) and grades[i] is the blade grade.
    The sign counts, for every generator of j, the generators of i it must be
    moved past, and adds one factor -1 per generator shared by i and j.
    """
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"algebra dimension must be in 1..{MAX_DIM}, got {n}")
    dim = 1 << n
    grades = _popcount(np.arange(dim))
    signs = np.empty((dim, dim), dtype=np.int8)
    for i in range(dim):
        for j in range(dim):
            swaps = 0
            for g in range(n):
                if j >> g & 1:
                    swaps += bin(i >> (g + 1)).count("1")
            swaps += bin(i & j).count("1")  # e_g * e_g = -1 per shared bit
            signs[i, j] = -1 if swaps & 1 else 1
    signs.flags.writeable = False
    grades.flags.writeable = False
    return signs, grades


@lru_cache(maxsize=None)
def reversal_signs(n):
    """Per-blade reversal signs (-1)**(r(r-1)/2) for grade r."""
    _, grades = blade_tables(n)
    out = np.where(grades * (grades - 1) // 2 % 2 == 0, 1.0, -1.0)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def grade_indices(n, k):
    _, grades = blade_tables(n)
    return np.nonzero(grades == k)[0]


# =============================================================================
# Array kernels (broadcast over leading axes, last axis = 2**n coefficients)
# =============================================================================

def gp_array(a, b, n):
    """Geometric product of coefficient arrays, broadcasting leading axes."""
    signs, _ = blade_tables(n)
    dim = 1 << n
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    out = np.zeros(shape + (dim,))
    all_idx = np.arange(dim)
    for i in range(dim):
        ai = a[..., i]
        if not np.any(ai):
            continue
        # for fixed i, j -> i ^ j permutes the blades; gather instead of scatter
        contrib = signs[i] * ai[..., None] * b
        out += contrib[..., i ^ all_idx]
    return out


def reverse_array(a, n):
    return np.asarray(a, dtype=np.float64) * reversal_signs(n)


def grade_project_array(a, n, k):
    out = np.zeros_like(np.asarray(a, dtype=np.float64))
    idx = grade_indices(n, k)
    out[..., idx] = np.asarray(a)[..., idx]
    return out


def vector_part_array(a, n):
    """Grade-1 coefficients as a plain length-n vector (last axis)."""
    return np.asarray(a)[..., grade_indices(n, 1)]


def vector_array(v, n):
    """Embed plain vectors (last axis length n) as grade-1 coefficient arrays."""
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros(v.shape[:-1] + (1 << n,))
    out[..., grade_indices(n, 1)] = v
    return out


def non_grade_norm(a, n, keep):
    """Max |coefficient| outside the listed grades."""
    a = np.asarray(a)
    _, grades = blade_tables(n)
    mask = np.ones(1 << n, dtype=bool)
    for k in keep:
        mask[grades == k] = False
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a[..., mask]))) if a[..., mask].size else 0.0


def exp_array(a, n, terms=18):
    """Clifford exponential by scaling-and-squaring plus Taylor series.

    Intended for bivector arguments (transport steps), where the series
    converges fast after scaling to max-norm <= 0.5.
    """
    a = np.asarray(a, dtype=np.float64)
    m = float(np.max(np.abs(a))) if a.size else 0.0
    s = max(0, int(math.ceil(math.log2(m / 0.5))) if m > 0.5 else 0)
    x = a / (1 << s)
    dim = 1 << n
    out = np.zeros_like(x)
    out[..., 0] = 1.0
    term = out.copy()
    for k in range(1, terms + 1):
        term = gp_array(term, x, n) / k
        out = out + term
    for _ in range(s):
        out = gp_array(out, out, n)
    return out


# =============================================================================
# Multivector
# =============================================================================

class Multivector:
    """Immutable element of Cl_n, dense 2**n coefficients, e_i^2 = -1."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs):
        if not 1 <= n <= MAX_DIM:
            raise ValueError(f"algebra dimension must be in 1..{MAX_DIM}, got {n}")
        coeffs = np.array(coeffs, dtype=np.float64).reshape(-1)
        if coeffs.shape != (1 << n,):
            raise ValueError(
                f"coefficient array must have length {1 << n} for Cl_{n}, "
                f"got {coeffs.shape}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *_):
        raise AttributeError("Multivector is immutable")

    # ---- constructors -------------------------------------------------
    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros(1 << n))

    @classmethod
    def scalar(cls, n, s):
        c = np.zeros(1 << n)
        c[0] = s
        return cls(n, c)

    @classmethod
    def blade(cls, n, mask, coeff=1.0):
        c = np.zeros(1 << n)
        c[mask] = coeff
        return cls(n, c)

    @classmethod
    def basis_vector(cls, n, i):
        """The generator e_{i+1} (0-based index i)."""
        if not 0 <= i < n:
            raise ValueError(f"generator index {i} out of range for Cl_{n}")
        return cls.blade(n, 1 << i)

    @classmethod
    def from_vector(cls, v, n=None):
        v = np.asarray(v, dtype=np.float64)
        if n is None:
            n = v.shape[-1]
        return cls(n, vector_array(v, n))

    # ---- structure -----------------------------------------------------
    @property
    def dim(self):
        """Algebra dimension n (the coefficient array has length 2**n)."""
        return self.n

    def _check(self, other):
        if self.n != other.n:
            raise ValueError(
                f"dimension mismatch: Cl_{self.n} vs Cl_{other.n}")

    def __add__(self, other):
        if np.isscalar(other):
            other = Multivector.scalar(self.n, other)
        self._check(other)
        return Multivector(self.n, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            other = Multivector.scalar(self.n, other)
        self._check(other)
        return Multivector(self.n, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self.n, -self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs * other)
        self._check(other)
        return Multivector(self.n, gp_array(self.coeffs, other.coeffs, self.n))

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, s):
        return Multivector(self.n, self.coeffs / s)

    def reversal(self):
        return Multivector(self.n, reverse_array(self.coeffs, self.n))

    def grade(self, k):
        return Multivector(self.n, grade_project_array(self.coeffs, self.n, k))

    def even_part(self):
        _, grades = blade_tables(self.n)
        c = np.where(grades % 2 == 0, self.coeffs, 0.0)
        return Multivector(self.n, c)

    def odd_part(self):
        _, grades = blade_tables(self.n)
        c = np.where(grades % 2 == 1, self.coeffs, 0.0)
        return Multivector(self.n, c)

    def is_even(self, tol=0.0):
        return non_grade_norm(self.coeffs, self.n, range(0, self.n + 1, 2)) <= tol

    def vector(self):
        """Grade-1 coefficients as a plain length-n array."""
        return vector_part_array(self.coeffs, self.n).copy()

    def scalar_part(self):
        return float(self.coeffs[0])

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def max_norm(self):
        return float(np.max(np.abs(self.coeffs)))

    def exp(self):
        return Multivector(self.n, exp_array(self.coeffs, self.n))

    def allclose(self, other, tol=1e-12):
        self._check(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def __repr__(self):
        _, grades = blade_tables(self.n)
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            if i == 0:
                parts.append(f"{c:g}")
            else:
                name = "e" + "".join(str(g + 1) for g in range(self.n)
                                     if i >> g & 1)
                parts.append(f"{c:g}*{name}")
        body = " + ".join(parts) if parts else "0"
        return f"Multivector(Cl_{self.n}: {body})"


# =============================================================================
# Pairing, commutator, operator <-> bivector dictionaries
# =============================================================================

def spin_bracket(phi, psi):
    """The Cl-valued pairing <<phi, psi>> = reversal(psi) * phi."""
    phi._check(psi)
    return psi.reversal() * phi


def commutator(a, b):
    """Half-commutator (a*b - b*a) / 2, the bracket every operator
    correspondence below is stated with."""
    a._check(b)
    return (a * b - b * a) * 0.5


class SkewOperator:
    """Skew-symmetric endomorphism of R^n; matrix[i, j] = <e_i, u(e_j)>."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("SkewOperator needs a square matrix")
        if not np.array_equal(matrix, -matrix.T):
            raise ValueError("matrix is not antisymmetric")
        matrix.flags.writeable = False
        self.matrix = matrix

    @property
    def n(self):
        return self.matrix.shape[0]

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=np.float64)


class OffDiagOperator:
    """Linear map u: R^p -> R^q inside the split R^n = R^p + R^q.

    matrix has shape (q, p); the adjoint u*: R^q -> R^p is matrix.T.
    """

    __slots__ = ("p", "q", "matrix")

    def __init__(self, p, q, matrix):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.shape != (q, p):
            raise ValueError(f"matrix shape {matrix.shape} does not match the "
                             f"split p={p}, q={q}")
        matrix.flags.writeable = False
        self.p = p
        self.q = q
        self.matrix = matrix

    @property
    def n(self):
        return self.p + self.q

    def full_matrix(self):
        """[[0, -u*], [u, 0]] on R^p + R^q."""
        n = self.n
        out = np.zeros((n, n))
        out[self.p:, :self.p] = self.matrix
        out[:self.p, self.p:] = -self.matrix.T
        return out


def bivector_of_skew(u):
    """Bivector (1/2) sum_j e_j * u(e_j) representing a skew operator.

    The half-commutator action [biv, x] recovers u(x) on vectors.
    """
    if isinstance(u, SkewOperator):
        m = u.matrix
    else:
        m = np.asarray(u, dtype=np.float64)
        if not np.array_equal(m, -m.T):
            raise ValueError("matrix is not antisymmetric")
    n = m.shape[0]
    c = np.zeros(1 << n)
    for j in range(n):
        for k in range(j + 1, n):
            c[(1 << j) | (1 << k)] = m[k, j]
    return Multivector(n, c)


def skew_of_bivector(b):
    """Inverse of bivector_of_skew (grade-1 commutator action as a matrix)."""
    n = b.n
    m = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            m[k, j] = b.coeffs[(1 << j) | (1 << k)]
            m[j, k] = -m[k, j]
    return m


def bivector_of_offdiag(u):
    """Bivector sum_{j<=p} e_j * u(e_j) of an off-diagonal block operator.

    Acts through the half-commutator as [biv, x] = u(x_p) - u*(x_q).
    """
    if not isinstance(u, OffDiagOperator):
        raise TypeError("bivector_of_offdiag expects an OffDiagOperator")
    n = u.n
    c = np.zeros(1 << n)
    for j in range(u.p):
        for r in range(u.q):
            c[(1 << j) | (1 << (u.p + r))] = u.matrix[r, j]
    return Multivector(n, c)


# =============================================================================
# Spin elements, adjoint action, lifting SO(n)
# =============================================================================

SPIN_TOL = 1e-10


class SpinElement:
    """Even multivector g with reversal(g) * g = 1 (max-norm tolerance).

    Everything produced here (Givens lifts, bivector exponentials, products)
    lies in Spin(n) proper; the constructor enforces the checkable part of
    that membership.
    """

    __slots__ = ("value",)

    def __init__(self, value, tol=SPIN_TOL):
        if not isinstance(value, Multivector):
            raise TypeError("SpinElement wraps a Multivector")
        if not value.is_even(tol):
            raise ValueError("spin element has odd-grade coefficients")
        unit = value.reversal() * value - Multivector.scalar(value.n, 1.0)
        if unit.max_norm() > tol:
            raise ValueError(
                f"reversal(g)*g deviates from 1 by {unit.max_norm():.3e} "
                f"(tolerance {tol:.1e})")
        self.value = value

    @property
    def n(self):
        return self.value.n

    @classmethod
    def identity(cls, n):
        return cls(Multivector.scalar(n, 1.0))

    def __mul__(self, other):
        if isinstance(other, SpinElement):
            return SpinElement(self.value * other.value)
        return NotImplemented

    def inverse(self):
        return SpinElement(self.value.reversal())

    def __neg__(self):
        return SpinElement(-self.value)

    def adjoint_matrix(self):
        """The SO(n) matrix of x -> g * x * reversal(g) on vectors."""
        n = self.n
        cols = []
        for i in range(n):
            cols.append(adjoint_action(self, Multivector.basis_vector(n, i)).vector())
        return np.column_stack(cols)

    def __repr__(self):
        return f"SpinElement({self.value!r})"


def adjoint_action(a, x):
    """Vector rotation Ad(a) x = a * x * reversal(a) for a spin element a.

    Rejects non-unit a; the result is the grade-1 part, checked pure to
    1e-10 relative to |x|.
    """
    if isinstance(a, Multivector):
        a = SpinElement(a)
    g = a.value
    if isinstance(x, np.ndarray) or (not isinstance(x, Multivector)):
        x = Multivector.from_vector(np.asarray(x, dtype=np.float64))
    g._check(x)
    if non_grade_norm(x.coeffs, x.n, (1,)) > 0:
        raise ValueError("adjoint_action expects a grade-1 argument")
    out = g * x * g.reversal()
    impurity = non_grade_norm(out.coeffs, out.n, (1,))
    scale = max(1.0, x.max_norm())
    if impurity > 1e-10 * scale:
        raise ValueError(f"adjoint action left grade-1: impurity {impurity:.3e}")
    return out.grade(1)


def _givens_factor(T, tol):
    """Factor special-orthogonal T into plane rotations, T = prod R(p,q,theta).

    Returns the factors in application order (their product, leftmost first,
    reproduces T).
    """
    n = T.shape[0]
    work = T.copy()
    undo = []  # rotations applied to the left of `work`
    for j in range(n - 1):
        for i in range(n - 1, j, -1):
            a, b = work[i - 1, j], work[i, j]
            r = math.hypot(a, b)
            if r <= tol:
                continue
            c, s = a / r, b / r
            # rotate rows (i-1, i) so that work[i, j] -> 0
            rows = work[[i - 1, i], :].copy()
            work[i - 1, :] = c * rows[0] + s * rows[1]
            work[i, :] = -s * rows[0] + c * rows[1]
            undo.append((i - 1, i, math.atan2(b, a)))
    # work is now upper triangular and orthogonal => diagonal of +-1;
    # for det +1 input with clean factorization the diagonal is +1.
    if np.max(np.abs(work - np.eye(n))) > 1e-8:
        raise ValueError("Givens factorization failed; input not special "
                         "orthogonal within tolerance")
    # G_m ... G_1 T = I with G_k = R(p, q, -theta_k), so T = R_1 R_2 ... R_m:
    # the inverse factors multiply back in append order.
    return undo


def spin_lift(T, special=True, tol=SPIN_TOL):
    """A spin element a with Ad(a) = T, for T in SO(n).

    The two lifts +-a are equally valid; the returned representative is
    normalized to nonnegative scalar part (ties broken by the first nonzero
    bivector coefficient).  `special` keeps the det +1 requirement on; a
    reflection (det < 0) is always rejected since it has no spin lift.
    """
    T = np.asarray(T, dtype=np.float64)
    n = T.shape[0]
    if T.shape != (n, n):
        raise ValueError("spin_lift needs a square matrix")
    ortho = np.max(np.abs(T.T @ T - np.eye(n)))
    if ortho > tol:
        raise ValueError(f"matrix is not orthogonal: |T^T T - I| = {ortho:.3e}")
    det = np.linalg.det(T)
    if det < 0 or (special and abs(det - 1.0) > 1e-8):
        raise ValueError(f"matrix is not special orthogonal (det = {det:g})")
    a = Multivector.scalar(n, 1.0)
    for (p, q, th) in _givens_factor(T, tol=1e-300):
        rotor = Multivector.scalar(n, math.cos(th / 2)) + \
            Multivector.blade(n, (1 << p) | (1 << q), math.sin(th / 2))
        a = a * rotor
    a = canonical_spin_sign(a)
    return SpinElement(a)


def canonical_spin_sign(a):
    """Pick the representative of {a, -a} with nonnegative scalar part;
    scalar-part ties broken by the first nonzero coefficient."""
    s = a.coeffs[0]
    if s < 0:
        return -a
    if s == 0:
        for c in a.coeffs[1:]:
            if c != 0:
                return a if c > 0 else -a
    return a
