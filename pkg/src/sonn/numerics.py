"""Scalar backends and matrix decompositions used by every other module.

Two backends coexist and are never mixed silently:

* exact: ``fractions.Fraction`` entries stored in ``dtype=object`` numpy
  arrays.  Closed under +, -, *, / and comparison, no rounding.  numpy
  cannot factor object matrices, so elimination kernels (det, inv, solve,
  rref, kernel) are implemented here directly.
* float: ordinary binary64 arrays, decompositions delegated to
  numpy/scipy (svd, eig, sorted real Schur, eigvalsh).

A "matrix" throughout the package is a plain 2-d numpy array; the backend
is carried by the dtype.  ``backend_of`` / ``require_same_backend`` are the
promotion guards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

EXACT = "exact"
FLOAT = "float"

# Relative tolerance reported alongside float comparisons, a small multiple
# of machine epsilon so chained desk-scale computations stay inside it.
FLOAT_CMP_RTOL = 64 * np.finfo(float).eps

DEFAULT_CLUSTER_TOL = 1e-7
SVD_RESIDUAL_TOL = 1e-10


class BackendError(TypeError):
    """Mixed or unsupported scalar backends."""


class SingularMatrixError(ValueError):
    """Operation requires an invertible (or independent) input."""


def backend_of(a) -> str:
    arr = np.asarray(a)
    if arr.dtype == object:
        return EXACT
    if np.issubdtype(arr.dtype, np.floating) or np.issubdtype(arr.dtype, np.integer):
        return FLOAT if np.issubdtype(arr.dtype, np.floating) else EXACT
    raise BackendError(f"unsupported dtype {arr.dtype!r}")


def is_exact(a) -> bool:
    return backend_of(a) == EXACT


def require_same_backend(*arrays) -> str:
    backends = {backend_of(a) for a in arrays}
    if len(backends) > 1:
        raise BackendError(f"mixed scalar backends {sorted(backends)}; convert explicitly")
    return backends.pop()


def rational(p, q=1) -> Fraction:
    return Fraction(p, q)


def rat_array(rows) -> np.ndarray:
    """Build an exact-backend array from ints, Fractions or 'p/q' strings."""
    conv = np.vectorize(lambda x: Fraction(x), otypes=[object])
    out = conv(np.asarray(rows, dtype=object))
    return out


def as_float(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        return np.array([[float(x) for x in row] for row in arr] if arr.ndim == 2
                        else [float(x) for x in arr], dtype=float)
    return arr.astype(float)


def as_exact(a) -> np.ndarray:
    """Exact view of integer-valued data.  Refuses non-integral floats."""
    arr = np.asarray(a)
    if arr.dtype == object:
        return arr

    def lift(x):
        f = Fraction(x)
        if f.limit_denominator(10 ** 6) != f:
            raise BackendError(f"cannot losslessly lift {x!r} to a rational")
        return f

    conv = np.vectorize(lift, otypes=[object])
    return conv(arr)


def identity(n: int, backend: str = FLOAT) -> np.ndarray:
    if backend == EXACT:
        out = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def zeros(shape, backend: str = FLOAT) -> np.ndarray:
    if backend == EXACT:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


def matmul(a, b) -> np.ndarray:
    """Product with the mixed-backend guard (never silently promotes)."""
    require_same_backend(a, b)
    return np.asarray(a) @ np.asarray(b)


def float_cmp(a: float, b: float):
    """Compare two floats; returns (equal, tolerance used)."""
    tol = FLOAT_CMP_RTOL * max(1.0, abs(a), abs(b))
    return abs(a - b) <= tol, tol


# ---------------------------------------------------------------------------
# exact elimination kernels


def _pivot_row(a, col, start):
    for r in range(start, a.shape[0]):
        if a[r, col] != 0:
            return r
    return None


def det(a) -> Fraction | float:
    a = np.asarray(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("determinant of a non-square matrix")
    if not is_exact(a):
        return float(np.linalg.det(a))
    m = a.copy()
    n = m.shape[0]
    sign = 1
    result = Fraction(1)
    for c in range(n):
        p = _pivot_row(m, c, c)
        if p is None:
            return Fraction(0)
        if p != c:
            m[[c, p]] = m[[p, c]]
            sign = -sign
        result *= m[c, c]
        inv_piv = 1 / Fraction(m[c, c])
        for r in range(c + 1, n):
            if m[r, c] != 0:
                m[r, c:] = m[r, c:] - (m[r, c] * inv_piv) * m[c, c:]
    return sign * result


def rref(a):
    """Reduced row echelon form of an exact matrix; returns (R, pivot columns)."""
    a = np.asarray(a)
    if not is_exact(a):
        raise BackendError("rref is exact-backend only; use svd ranks for floats")
    m = a.copy()
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = _pivot_row(m, c, r)
        if p is None:
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = m[r] / Fraction(m[r, c])
        for rr in range(rows):
            if rr != r and m[rr, c] != 0:
                m[rr] = m[rr] - m[rr, c] * m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a) -> int:
    a = np.asarray(a)
    if is_exact(a):
        return len(rref(a)[1])
    if min(a.shape) == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > 1e-12 * s[0]))


def solve(a, b) -> np.ndarray:
    """Solve a x = b for square invertible a, either backend."""
    require_same_backend(a, b)
    a = np.asarray(a)
    b = np.asarray(b)
    if not is_exact(a):
        try:
            return np.linalg.solve(a, b)
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(str(e)) from None
    vec = b.ndim == 1
    rhs = b.reshape(-1, 1) if vec else b
    n = a.shape[0]
    aug = np.concatenate([a.copy(), rhs.copy()], axis=1)
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError("exact solve: singular matrix")
    x = red[:, n:]
    return x[:, 0] if vec else x


def inv(a) -> np.ndarray:
    a = np.asarray(a)
    if not is_exact(a):
        try:
            return np.linalg.inv(a)
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(str(e)) from None
    return solve(a, identity(a.shape[0], EXACT))


def kernel(a) -> np.ndarray:
    """Columns spanning the null space.  Exact via rref, float via LAPACK."""
    a = np.asarray(a)
    rows, cols = a.shape
    if not is_exact(a):
        return scipy.linalg.null_space(a)
    red, pivots = rref(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = zeros((cols, len(free)), EXACT)
    for j, fc in enumerate(free):
        basis[fc, j] = Fraction(1)
        for r, pc in enumerate(pivots):
            basis[pc, j] = -red[r, fc]
    return basis


# ---------------------------------------------------------------------------
# float decompositions


def svd(m):
    """SVD of a square invertible float matrix.

    Returns (U, sigma, Vt) with sigma strictly positive and weakly
    decreasing; raises SingularMatrixError otherwise and on reconstruction
    residual above 1e-10 relative.
    """
    m = as_float(np.asarray(m))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("svd expects a square matrix")
    u, s, vt = np.linalg.svd(m)
    if s[-1] <= 0 or s[-1] <= 1e-14 * s[0]:
        raise SingularMatrixError("svd: singular input")
    residual = np.linalg.norm(u @ np.diag(s) @ vt - m) / np.linalg.norm(m)
    if residual > SVD_RESIDUAL_TOL:
        raise ArithmeticError(f"svd reconstruction residual {residual:.3e}")
    return u, s, vt


@dataclass(frozen=True)
class EigenSplit:
    """Generalized eigenspaces of a real matrix grouped by log-modulus.

    ``clusters`` is sorted by decreasing log-modulus; each entry is
    (log-modulus, real basis matrix whose columns span the invariant
    subspace, with complex-conjugate pairs merged into real 2-planes).
    """

    clusters: list = field(default_factory=list)
    tol: float = DEFAULT_CLUSTER_TOL
    ambiguous: bool = False

    @property
    def log_moduli(self):
        return [c[0] for c in self.clusters]

    def cluster_dims(self):
        return [c[1].shape[1] for c in self.clusters]

    def basis_for(self, index: int) -> np.ndarray:
        return self.clusters[index][1]


def eigen_split(m, tol: float = DEFAULT_CLUSTER_TOL) -> EigenSplit:
    """Cluster the spectrum of m by log-modulus and return invariant bases.

    tol is relative: the working separation is tol * max(1, spread of
    log-moduli).  Two moduli within twice the working separation of a
    cluster boundary set the ambiguity flag.  Bases come from one sorted
    real Schur factorization per cluster, so defective (Jordan) blocks are
    handled exactly like diagonalizable ones.
    """
    m = as_float(np.asarray(m))
    if m.shape[0] != m.shape[1]:
        raise ValueError("eigen_split expects a square matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = m.shape[0]
    eigs = np.linalg.eigvals(m)
    if np.min(np.abs(eigs)) == 0:
        raise SingularMatrixError("eigen_split: singular input")
    logm = np.log(np.abs(eigs))
    scale = max(1.0, float(np.max(logm) - np.min(logm)))
    sep = tol * scale

    order = np.argsort(-logm)
    sorted_logm = logm[order]
    boundaries = []
    for i in range(n - 1):
        if sorted_logm[i] - sorted_logm[i + 1] > sep:
            boundaries.append(i)
    # cluster index for every sorted eigenvalue
    labels = np.zeros(n, dtype=int)
    k = 0
    for i in range(1, n):
        if (i - 1) in boundaries:
            k += 1
        labels[i] = k
    n_clusters = k + 1

    ambiguous = False
    for b in boundaries:
        gap = sorted_logm[b] - sorted_logm[b + 1]
        if gap <= 2 * sep:
            ambiguous = True
    if ambiguous:
        warnings.warn("eigen_split: modulus clustering is ambiguous at this tolerance",
                      RuntimeWarning, stacklevel=2)

    clusters = []
    margin = max(sep, 1e-12) / 2
    for c in range(n_clusters):
        members = sorted_logm[labels == c]
        center = float(np.mean(members))
        lo, hi = float(members.min()) - margin, float(members.max()) + margin

        def in_cluster(re, im, _lo=lo, _hi=hi):
            return _lo <= np.log(max(np.hypot(re, im), 1e-300)) <= _hi

        t, z, sdim = scipy.linalg.schur(m, output="real", sort=in_cluster)
        expected = int(np.sum(labels == c))
        if sdim != expected:
            raise ArithmeticError(
                f"eigen_split: Schur sort selected {sdim} eigenvalues, expected {expected}")
        clusters.append((center, z[:, :sdim].copy()))

    split = EigenSplit(clusters=clusters, tol=tol, ambiguous=ambiguous)
    total = sum(split.cluster_dims())
    if total != n:
        raise ArithmeticError("eigen_split: cluster dimensions do not sum to ambient")
    return split


def invariance_residual(m, basis) -> float:
    """How far m maps span(basis) outside itself, relative to ||m||."""
    m = as_float(np.asarray(m))
    basis = as_float(np.asarray(basis))
    mv = m @ basis
    proj = basis @ np.linalg.lstsq(basis, mv, rcond=None)[0]
    denom = np.linalg.norm(m) * max(1.0, np.linalg.norm(basis))
    return float(np.linalg.norm(mv - proj) / denom)


# ---------------------------------------------------------------------------
# symmetric forms


def signature(s):
    """Signature (p, q, z) of a symmetric matrix, congruence-invariant.

    Exact backend: symmetric Gaussian congruence over the rationals.
    Float backend: eigvalsh with a relative zero threshold.
    """
    s = np.asarray(s)
    if s.shape[0] != s.shape[1]:
        raise ValueError("signature expects a square matrix")
    if is_exact(s):
        if not np.array_equal(s, s.T):
            raise ValueError("signature expects a symmetric matrix")
        return _signature_exact(s.copy())
    if not np.allclose(s, s.T, rtol=1e-10, atol=1e-12):
        raise ValueError("signature expects a symmetric matrix")
    eigs = np.linalg.eigvalsh(s)
    scale = np.max(np.abs(eigs)) if eigs.size else 0.0
    thresh = 1e-9 * max(scale, 1e-300)
    p = int(np.sum(eigs > thresh))
    q = int(np.sum(eigs < -thresh))
    return p, q, s.shape[0] - p - q


def _signature_exact(m):
    n = m.shape[0]
    p = q = z = 0
    active = m
    while active.shape[0] > 0:
        k = active.shape[0]
        # prefer a nonzero diagonal pivot
        piv = next((i for i in range(k) if active[i, i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(k) for j in range(i + 1, k)
                         if active[i, j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # congruence x_i <- x_i + x_j creates the diagonal entry 2*a_ij
            active[i, :] = active[i, :] + active[j, :]
            active[:, i] = active[:, i] + active[:, j]
            piv = i
        if piv != 0:
            active[[0, piv]] = active[[piv, 0]]
            active[:, [0, piv]] = active[:, [piv, 0]]
        d = active[0, 0]
        if d > 0:
            p += 1
        else:
            q += 1
        if active.shape[0] == 1:
            break
        col = active[1:, 0]
        block = active[1:, 1:]
        # Schur complement is a congruence here because the matrix is symmetric
        adj = block - np.outer(col, col) / Fraction(d)
        active = adj
    z = n - p - q
    return p, q, z


def wedge_sign(vectors, reference=None) -> int:
    """Sign of det of the coordinate matrix of vectors in the reference basis."""
    vectors = np.asarray(vectors)
    if vectors.shape[0] != vectors.shape[1]:
        raise ValueError("wedge_sign needs exactly dim vectors")
    if reference is None:
        coords = vectors
    else:
        require_same_backend(vectors, reference)
        coords = solve(np.asarray(reference), vectors)
    if is_exact(coords):
        d = det(coords)
        if d == 0:
            raise SingularMatrixError("wedge_sign: dependent vectors")
        return 1 if d > 0 else -1
    # positive column scaling cannot change the sign; normalizing makes the
    # determinant Hadamard-bounded so an absolute cutoff is meaningful
    norms = np.linalg.norm(coords, axis=0)
    if np.any(norms == 0):
        raise SingularMatrixError("wedge_sign: dependent vectors")
    d = det(coords / norms)
    if abs(d) < 1e-12:
        raise SingularMatrixError("wedge_sign: dependent vectors")
    return 1 if d > 0 else -1


def sign_normalize(a) -> np.ndarray:
    """Projective representative with the largest-magnitude entry positive.

    Ties broken row-major.  Used whenever a PSL/PSO element needs a matrix
    representative.
    """
    a = np.asarray(a)
    flat = a.ravel()
    if is_exact(a):
        mags = np.array([abs(x) for x in flat], dtype=object)
        idx = max(range(len(flat)), key=lambda i: (mags[i], -i))
        pivot = flat[idx]
    else:
        idx = int(np.argmax(np.abs(flat)))
        pivot = flat[idx]
    if pivot == 0:
        raise ValueError("sign_normalize: zero matrix")
    return -a if pivot < 0 else a


def matrix_exp(a) -> np.ndarray:
    """Float matrix exponential (scaling and squaring, Pade)."""
    return scipy.linalg.expm(as_float(np.asarray(a)))


def principal_angle_distance(a, b) -> float:
    """Largest principal angle between two column spans (float route)."""
    a = as_float(np.asarray(a))
    b = as_float(np.asarray(b))
    angles = scipy.linalg.subspace_angles(a, b)
    return float(angles.max()) if angles.size else 0.0


# --- JSON-style codecs -------------------------------------------------------
#
# Rationals travel as "p/q" strings so round trips stay lossless; floats stay
# native JSON numbers.


def scalar_to_doc(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def scalar_from_doc(v):
    if isinstance(v, str):
        num, _, den = v.partition("/")
        return Fraction(int(num), int(den) if den else 1)
    if isinstance(v, bool):
        raise ValueError("boolean is not a scalar")
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def matrix_to_doc(m) -> list:
    m = np.asarray(m)
    return [[scalar_to_doc(x) for x in row] for row in m.tolist()]


def matrix_from_doc(rows) -> np.ndarray:
    vals = [[scalar_from_doc(v) for v in row] for row in rows]
    exact = any(isinstance(x, Fraction) for row in vals for x in row)
    if exact:
        out = np.empty((len(vals), len(vals[0])), dtype=object)
        for i, row in enumerate(vals):
            for j, x in enumerate(row):
                out[i, j] = Fraction(x)
        return out
    return np.array(vals, dtype=float)
