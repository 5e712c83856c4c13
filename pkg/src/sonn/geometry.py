"""Bilinear spaces, isotropic subspaces, flags, and affine charts.

Two coordinate systems are used for the even signature-(n,n) space: the
"antidiagonal-e" basis, in which the form pairs the i-th and (2n+1-i)-th
coordinates, and the "diagonalized-e'" basis, in which the form is
diag(Id_n, -Id_n).  The odd signature-(n,n-1) space comes either in its
antidiagonal "odd-f" basis or diagonalized.  The paper-literal change of
basis scales norms by 2; an isometrically normalized variant (coefficients
1/sqrt(2)) is the default for metric quantities.  Spans, signs, isotropy
and group membership are scale-invariant, so the literal variant is kept
for exact (rational) pipelines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import numerics as nm

TAG_E = "antidiagonal-e"
TAG_EPRIME = "diagonalized-e'"
TAG_F = "odd-f"

_ISO_TOL = 1e-8
_RANK_RTOL = 1e-8  # smallest/largest singular value cutoff for transversality
_ANGLE_TOL = 1e-9  # float subspace equality


def _antidiag_form(d: int, backend: str) -> np.ndarray:
    if backend == nm.EXACT:
        out = nm.zeros((d, d), nm.EXACT)
        for i in range(d):
            out[i, d - 1 - i] = Fraction(1)
        return out
    return np.fliplr(np.eye(d))


def _diag_form(p: int, q: int, backend: str) -> np.ndarray:
    if backend == nm.EXACT:
        out = nm.zeros((p + q, p + q), nm.EXACT)
        for i in range(p):
            out[i, i] = Fraction(1)
        for i in range(p, p + q):
            out[i, i] = Fraction(-1)
        return out
    return np.diag([1.0] * p + [-1.0] * q)


@dataclass(frozen=True, eq=False)
class BilinearSpace:
    """A nondegenerate symmetric bilinear form together with its basis tag."""

    dim: int
    form: np.ndarray
    tag: str

    def __post_init__(self):
        if self.tag not in (TAG_E, TAG_EPRIME, TAG_F):
            raise ValueError(f"unknown basis tag {self.tag!r}")
        if self.tag == TAG_E and self.dim % 2:
            raise ValueError("antidiagonal-e tag requires even dimension")
        if self.tag == TAG_F and self.dim % 2 == 0:
            raise ValueError("odd-f tag requires odd dimension")
        f = np.asarray(self.form)
        if f.shape != (self.dim, self.dim):
            raise ValueError("form shape does not match dim")

    @property
    def backend(self) -> str:
        return nm.backend_of(self.form)

    @property
    def n(self) -> int:
        return (self.dim + 1) // 2

    def value(self, u, v):
        """<u, v> for coordinate vectors."""
        u = np.asarray(u).reshape(self.dim)
        v = np.asarray(v).reshape(self.dim)
        res = u @ self.form @ v
        return res if isinstance(res, Fraction) else float(res)

    def gram(self, basis) -> np.ndarray:
        basis = np.asarray(basis)
        return basis.T @ self.form @ basis

    def check_signature(self) -> None:
        n = self.n
        expect = (n, n, 0) if self.dim % 2 == 0 else (n, n - 1, 0)
        got = nm.signature(self.form)
        if got != expect:
            raise ValueError(f"form signature {got} does not match tag/dim {expect}")


def even_space(n: int, tag: str = TAG_E, backend: str = nm.EXACT) -> BilinearSpace:
    """Signature-(n,n) space in the requested coordinates."""
    if tag == TAG_E:
        return BilinearSpace(2 * n, _antidiag_form(2 * n, backend), tag)
    if tag == TAG_EPRIME:
        return BilinearSpace(2 * n, _diag_form(n, n, backend), tag)
    raise ValueError(f"even space cannot carry tag {tag!r}")


def odd_space(n: int, tag: str = TAG_F, backend: str = nm.EXACT) -> BilinearSpace:
    """Signature-(n,n-1) space in the requested coordinates."""
    if tag == TAG_F:
        return BilinearSpace(2 * n - 1, _antidiag_form(2 * n - 1, backend), tag)
    if tag == TAG_EPRIME:
        return BilinearSpace(2 * n - 1, _diag_form(n, n - 1, backend), tag)
    raise ValueError(f"odd space cannot carry tag {tag!r}")


# --- subspaces ---------------------------------------------------------------


def _unit_columns(b: np.ndarray) -> np.ndarray:
    """Rescale float columns to unit norm; rank judgments must be scale-free."""
    if nm.backend_of(b) == nm.EXACT:
        return b
    norms = np.linalg.norm(b, axis=0)
    if np.any(norms == 0):
        return b
    return b / norms


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span of `basis` inside `ambient`.  Compares equal by span."""

    ambient: BilinearSpace
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.ndim == 1:
            b = b.reshape(-1, 1)
            object.__setattr__(self, "basis", b)
        if b.shape[0] != self.ambient.dim:
            raise ValueError("basis rows must match ambient dimension")
        if b.shape[1] and nm.rank(_unit_columns(b)) != b.shape[1]:
            raise ValueError("basis columns are linearly dependent")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def backend(self) -> str:
        return nm.backend_of(self.basis)

    def canonical(self) -> np.ndarray:
        if self.backend == nm.EXACT:
            red, _ = nm.rref(self.basis.T)
            return red[: self.dim].T
        u, _, _ = np.linalg.svd(nm.as_float(self.basis), full_matrices=False)
        return u[:, : self.dim]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient.dim != other.ambient.dim or self.dim != other.dim:
            return False
        if self.backend == nm.EXACT and other.backend == nm.EXACT:
            return bool(np.array_equal(self.canonical(), other.canonical()))
        if self.dim == 0:
            return True
        return nm.principal_angle_distance(self.basis, other.basis) < _ANGLE_TOL

    def contains(self, vec) -> bool:
        if self.dim == self.ambient.dim:
            return True
        vec = np.asarray(vec).reshape(-1, 1)
        if self.backend == nm.EXACT and nm.backend_of(vec) == nm.EXACT:
            return nm.rank(np.hstack([self.basis, vec])) == self.dim
        stacked = _unit_columns(nm.as_float(np.hstack([self.basis, vec])))
        s = np.linalg.svd(stacked, compute_uv=False)
        return bool(s[self.dim] <= _RANK_RTOL * s[0])

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(other.basis[:, j]) for j in range(other.dim))

    def is_isotropic(self) -> bool:
        g = self.ambient.gram(self.basis)
        if nm.backend_of(g) == nm.EXACT:
            return all(x == 0 for x in g.ravel())
        scale = max(1.0, float(np.abs(self.basis).max()) ** 2)
        return bool(np.all(np.abs(g) <= _ISO_TOL * scale))


def coordinate_span(space: BilinearSpace, indices: Sequence[int]) -> Subspace:
    """Span of the standard basis vectors with the given 1-based indices."""
    cols = nm.identity(space.dim, space.backend)[:, [i - 1 for i in indices]]
    return Subspace(space, cols)


def apply_map(g, w: Subspace) -> Subspace:
    return Subspace(w.ambient, nm.matmul(np.asarray(g), w.basis))


def perp(w: Subspace) -> Subspace:
    """Orthogonal complement with respect to the ambient form."""
    a = nm.matmul(w.basis.T, w.ambient.form)
    return Subspace(w.ambient, nm.kernel(a))


def intersect(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient.dim != b.ambient.dim:
        raise ValueError("ambient dimensions differ")
    lhs = _unit_columns(a.basis)
    stacked = np.hstack([lhs, _unit_columns(b.basis)])
    k = nm.kernel(stacked)
    # a kernel vector (x, y) satisfies A x = -B y, so A x lies in both spans
    basis = nm.matmul(lhs, k[: a.dim])
    return Subspace(a.ambient, basis)


def span_sum(*subs: Subspace) -> Subspace:
    ambient = subs[0].ambient
    stacked = np.hstack([s.basis for s in subs])
    if nm.backend_of(stacked) == nm.EXACT:
        red, pivots = nm.rref(stacked.T)
        return Subspace(ambient, red[: len(pivots)].T)
    u, s, _ = np.linalg.svd(_unit_columns(nm.as_float(stacked)), full_matrices=False)
    keep = s > _RANK_RTOL * max(1e-300, s[0])
    return Subspace(ambient, u[:, keep])


def transversality_margin(*subs: Subspace) -> float:
    """sigma_min / sigma_max of the stacked bases (float route).

    Each basis is orthonormalized first so the ratio depends only on the
    subspaces, not on the scale of whatever spanning columns they carry.
    """
    blocks = []
    for s in subs:
        q, _ = np.linalg.qr(nm.as_float(s.basis))
        blocks.append(q)
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0


def transverse(*subs: Subspace) -> bool:
    """True iff the subspaces sum directly to the whole ambient space."""
    ambient = subs[0].ambient
    total = sum(s.dim for s in subs)
    if total != ambient.dim:
        raise ValueError(f"dimensions sum to {total}, ambient is {ambient.dim}")
    if all(s.backend == nm.EXACT for s in subs):
        return nm.rank(np.hstack([s.basis for s in subs])) == ambient.dim
    return transversality_margin(*subs) > _RANK_RTOL


# --- coordinate changes ------------------------------------------------------


def even_change_matrix(n: int, variant: str = "isometric") -> np.ndarray:
    """Columns are the diagonalizing basis vectors in antidiagonal-e coordinates.

    Literal columns: e_i + e_{2n+1-i} for i <= n and e_{i-n} - e_{3n+1-i} for
    i > n.  The isometric variant divides every column by sqrt(2).
    """
    e = nm.zeros((2 * n, 2 * n), nm.EXACT)
    for i in range(1, n + 1):
        e[i - 1, i - 1] = Fraction(1)
        e[2 * n - i, i - 1] = Fraction(1)
    for i in range(n + 1, 2 * n + 1):
        e[i - n - 1, i - 1] = Fraction(1)
        e[3 * n - i, i - 1] = Fraction(-1)
    if variant == "literal":
        return e
    if variant == "isometric":
        return nm.as_float(e) / math.sqrt(2.0)
    raise ValueError(f"unknown variant {variant!r}")


def odd_change_matrix(n: int, variant: str = "isometric") -> np.ndarray:
    """Diagonalizing basis for the odd space, expressed in odd-f coordinates.

    The middle basis vector is already a unit vector and is never rescaled;
    only the hyperbolic pairs carry the 1/sqrt(2) normalization.
    """
    d = 2 * n - 1
    e = nm.zeros((d, d), nm.EXACT)
    for i in range(1, n):
        e[i - 1, i - 1] = Fraction(1)
        e[2 * n - 1 - i, i - 1] = Fraction(1)
    e[n - 1, n - 1] = Fraction(1)
    for j in range(1, n):
        e[j - 1, n + j - 1] = Fraction(1)
        e[2 * n - 1 - j, n + j - 1] = Fraction(-1)
    if variant == "literal":
        return e
    if variant == "isometric":
        out = nm.as_float(e) / math.sqrt(2.0)
        out[:, n - 1] = nm.as_float(e[:, n - 1])
        return out
    raise ValueError(f"unknown variant {variant!r}")


def _change_matrix(dim: int, variant: str) -> np.ndarray:
    if dim % 2 == 0:
        return even_change_matrix(dim // 2, variant)
    return odd_change_matrix((dim + 1) // 2, variant)


def change_basis(x, from_tag: str, to_tag: str, variant: str = "isometric"):
    """Move a vector or Subspace between the tagged coordinate systems.

    Vectors transform by E^-1 (toward the diagonalized basis) or E (back),
    where the columns of E express the diagonalized basis in the antidiagonal
    one.  For subspaces the ambient tag is updated alongside the coordinates.
    """
    if from_tag == to_tag:
        raise ValueError("tags must differ")
    if isinstance(x, Subspace):
        if x.ambient.tag != from_tag:
            raise ValueError(f"subspace is tagged {x.ambient.tag!r}, not {from_tag!r}")
        coords = change_basis(x.basis, from_tag, to_tag, variant)
        target = _space_from_tag(x.ambient.dim, to_tag, nm.backend_of(coords))
        return Subspace(target, coords)
    arr = np.asarray(x)
    vec = arr.ndim == 1
    cols = arr.reshape(-1, 1) if vec else arr
    dim = cols.shape[0]
    pair = {from_tag, to_tag}
    if pair not in ({TAG_E, TAG_EPRIME}, {TAG_F, TAG_EPRIME}):
        raise ValueError(f"no change of basis between {from_tag!r} and {to_tag!r}")
    if TAG_E in pair and dim % 2:
        raise ValueError("antidiagonal-e tag requires even dimension")
    if TAG_F in pair and dim % 2 == 0:
        raise ValueError("odd-f tag requires odd dimension")
    e = _change_matrix(dim, variant)
    if variant == "literal" and nm.backend_of(cols) == nm.FLOAT:
        e = nm.as_float(e)
    if to_tag == TAG_EPRIME:
        out = nm.solve(e, cols) if nm.backend_of(e) == nm.backend_of(cols) else np.linalg.solve(nm.as_float(e), nm.as_float(cols))
    else:
        out = nm.matmul(e, cols) if nm.backend_of(e) == nm.backend_of(cols) else nm.as_float(e) @ nm.as_float(cols)
    return out.reshape(-1) if vec else out


def change_basis_matrix(m, from_tag: str, to_tag: str, variant: str = "isometric") -> np.ndarray:
    """Conjugate a linear map between the tagged coordinate systems.

    In the even case the isometric and literal variants agree exactly (the
    sqrt(2) factors cancel under conjugation), so the literal matrix is used
    whenever it keeps the computation rational.
    """
    m = np.asarray(m)
    dim = m.shape[0]
    if dim % 2 == 0 and variant == "isometric":
        variant = "literal"  # conjugation is normalization-free in the even case
    e = _change_matrix(dim, variant)
    if nm.backend_of(e) != nm.backend_of(m):
        e = nm.as_float(e)
        m = nm.as_float(m)
    if to_tag == TAG_EPRIME:
        return nm.solve(e, nm.matmul(m, e))
    return nm.matmul(nm.matmul(e, m), nm.inv(e))


def embed_odd(x, variant: str = "isometric"):
    """Include the odd-f space into the antidiagonal-e space of one more dimension.

    f_i -> e_i for i <= n-1 and f_{n+j} -> e_{n+1+j}; the middle vector goes to
    c (e_n + e_{n+1}) with c = 1/sqrt(2) (isometric) or 1/2 (paper-literal).
    The image always lies in the orthocomplement of e_n - e_{n+1}; only the
    isometric variant preserves the form values themselves.
    """
    if isinstance(x, Subspace):
        if x.ambient.tag != TAG_F:
            raise ValueError("embed_odd expects the odd-f space")
        n = x.ambient.n
        target = even_space(n, TAG_E, x.backend if variant == "literal" else nm.FLOAT)
        return Subspace(target, embed_odd(x.basis, variant))
    arr = np.asarray(x)
    vec = arr.ndim == 1
    cols = arr.reshape(-1, 1) if vec else arr
    d = cols.shape[0]
    if d % 2 == 0:
        raise ValueError("odd-f vectors have odd length")
    n = (d + 1) // 2
    if variant == "isometric":
        c = 1.0 / math.sqrt(2.0)
        cols = nm.as_float(cols)
        out = np.zeros((2 * n, cols.shape[1]))
    elif variant == "literal":
        c = Fraction(1, 2) if nm.backend_of(cols) == nm.EXACT else 0.5
        out = nm.zeros((2 * n, cols.shape[1]), nm.backend_of(cols))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out[: n - 1] = cols[: n - 1]
    out[n - 1] = c * cols[n - 1]
    out[n] = c * cols[n - 1]
    out[n + 1 :] = cols[n:]
    return out.reshape(-1) if vec else out


# --- the sign invariant on isotropic n-planes --------------------------------


def dual_null_basis(h: Subspace) -> np.ndarray:
    """A basis W of an isotropic complement with <v_i, w_j> = delta_ij.

    The particular solution J V (V^T V)^{-1} pairs correctly against V; the
    symmetric correction W0 - V S / 2 with S = W0^T J W0 makes the span
    isotropic without disturbing the pairing.
    """
    v = h.basis
    j = h.ambient.form
    gram = nm.matmul(v.T, v)
    w0 = nm.matmul(nm.matmul(j, v), nm.inv(gram))
    s = nm.matmul(nm.matmul(w0.T, j), w0)
    if h.backend == nm.EXACT:
        w = w0 - nm.matmul(v, s) / Fraction(2)
    else:
        w = w0 - (v @ s) / 2.0
    return w


def tau_sign(h: Subspace) -> int:
    """Orientation class (+1 or -1) of an isotropic n-plane.

    Computed in the antidiagonal-e coordinates: the wedge of (v_1..v_n,
    w_n..w_1) against the standard basis, where (w_i) is a dual null basis.
    The result does not depend on the choice of basis of the plane.
    """
    space = h.ambient
    if space.dim % 2:
        raise ValueError("tau is defined on the even space")
    if space.tag == TAG_EPRIME:
        h = change_basis(h, TAG_EPRIME, TAG_E, variant="literal")
        space = h.ambient
    n = space.n
    if h.dim != n:
        raise ValueError(f"expected an n-plane, got dimension {h.dim}")
    if not h.is_isotropic():
        raise ValueError("tau requires an isotropic plane")
    if h.backend == nm.FLOAT:
        # basis-independent, so orthonormalize to keep the frame conditioned
        q, _ = np.linalg.qr(h.basis)
        h = Subspace(space, q)
    w = dual_null_basis(h)
    frame = np.hstack([h.basis, w[:, ::-1]])
    return nm.wedge_sign(frame)


def extend_isotropic(h0: Subspace) -> tuple[Subspace, Subspace]:
    """The two isotropic n-planes containing an isotropic (n-1)-plane.

    Works in the signature-(1,1) quotient perp(H0)/H0: its two null lines lift
    to the two extensions.  Returns (H_plus, H_minus) labeled by tau.
    Rational inputs stay rational when the discriminant is a perfect square;
    otherwise the computation degrades to floats.
    """
    space = h0.ambient
    if space.dim % 2:
        raise ValueError("extensions live in the even space")
    n = space.n
    if h0.dim != n - 1:
        raise ValueError(f"expected an (n-1)-plane, got dimension {h0.dim}")
    if not h0.is_isotropic():
        raise ValueError("input plane must be isotropic")
    p = perp(h0)
    # pick two columns of perp(H0) that extend H0 to a basis of perp(H0)
    cand = []
    current = h0.basis
    for jcol in range(p.basis.shape[1]):
        col = p.basis[:, jcol : jcol + 1]
        trial = np.hstack([current, col])
        if nm.rank(trial) == trial.shape[1]:
            current = trial
            cand.append(col)
        if len(cand) == 2:
            break
    u = np.hstack(cand)
    g = space.gram(u)
    g11, g12, g22 = g[0, 0], g[0, 1], g[1, 1]
    exact = nm.backend_of(g) == nm.EXACT
    lines = _null_lines(g11, g12, g22, exact)
    planes = []
    for x, y in lines:
        if exact and not isinstance(x, Fraction):
            exact = False
        vec = x * u[:, 0] + y * u[:, 1]
        if not exact:
            basis = np.hstack([nm.as_float(h0.basis), nm.as_float(vec).reshape(-1, 1)])
        else:
            basis = np.hstack([h0.basis, vec.reshape(-1, 1)])
        planes.append(Subspace(space, basis))
    signs = [tau_sign(pl) for pl in planes]
    if sorted(signs) != [-1, 1]:
        raise ArithmeticError("extension signs did not split into +1 and -1")
    plus = planes[signs.index(1)]
    minus = planes[signs.index(-1)]
    return plus, minus


def _null_lines(g11, g12, g22, exact: bool):
    """Solutions (x, y) of g11 x^2 + 2 g12 xy + g22 y^2 = 0, two lines."""
    if exact:
        if g11 == 0:
            return [(Fraction(1), Fraction(0)), (Fraction(g22), Fraction(-2) * g12)]
        disc = g12 * g12 - g11 * g22
        if disc < 0:
            raise ValueError("quotient form is definite; input was not isotropic-compatible")
        root = _fraction_sqrt(disc)
        if root is not None:
            return [((-g12 + root) / g11, Fraction(1)), ((-g12 - root) / g11, Fraction(1))]
        g11, g12, g22 = float(g11), float(g12), float(g22)
    scale = max(abs(g11), abs(g12), abs(g22))
    if abs(g11) <= 1e-14 * scale:
        return [(1.0, 0.0), (float(g22), -2.0 * float(g12))]
    disc = g12 * g12 - g11 * g22
    if disc < 0:
        raise ValueError("quotient form is definite; input was not isotropic-compatible")
    r = math.sqrt(disc)
    return [((-g12 + r) / g11, 1.0), ((-g12 - r) / g11, 1.0)]


def _fraction_sqrt(x: Fraction) -> Optional[Fraction]:
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


# --- flags -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Flag:
    """A nested chain of subspaces, optionally with the pair of middle planes."""

    space: BilinearSpace
    parts: tuple
    middle: Optional[tuple] = None  # (plus, minus)

    def __post_init__(self):
        parts = tuple(sorted(self.parts, key=lambda kv: kv[0]))
        object.__setattr__(self, "parts", parts)

    @property
    def indices(self) -> list[int]:
        return [k for k, _ in self.parts]

    def part(self, k: int) -> Subspace:
        for idx, sub in self.parts:
            if idx == k:
                return sub
        raise KeyError(k)

    def check(self) -> None:
        prev = None
        for k, sub in self.parts:
            if sub.dim != k:
                raise ValueError(f"part {k} has dimension {sub.dim}")
            if prev is not None and not sub.contains_subspace(prev):
                raise ValueError("flag chain is not nested")
            prev = sub
        d = self.space.dim
        for k, sub in self.parts:
            if d - k in self.indices and not (self.part(d - k) == perp(sub)):
                raise ValueError(f"part {d - k} is not the orthocomplement of part {k}")
        if self.middle is not None:
            plus, minus = self.middle
            if tau_sign(plus) != 1 or tau_sign(minus) != -1:
                raise ValueError("middle planes are mislabeled")


def flag_transverse(f1: Flag, f2: Flag) -> bool:
    """Chain transversality: every pair of complementary parts sums to everything.

    The middle planes are not consulted here; the three-term middle condition
    is a separate check that lives with the positivity machinery.
    """
    d = f1.space.dim
    ok = False
    for k in f1.indices:
        if d - k in f2.indices:
            ok = True
            if not transverse(f1.part(k), f2.part(d - k)):
                return False
    if not ok:
        raise ValueError("flags have no complementary pair of parts")
    return True


def standard_flag(space: BilinearSpace) -> Flag:
    """F^(k) = span(e_1..e_k) for k < n, orthocomplements, and the middle pair."""
    n = space.n
    parts = []
    for k in range(1, n):
        sub = coordinate_span(space, range(1, k + 1))
        parts.append((k, sub))
        parts.append((space.dim - k, perp(sub)))
    middle = (
        coordinate_span(space, range(1, n + 1)),
        coordinate_span(space, list(range(1, n)) + [n + 1]),
    )
    return Flag(space, tuple(parts), middle)


# --- affine charts -----------------------------------------------------------


def graph_chart(x: Subspace, y: Subspace, z: Subspace) -> np.ndarray:
    """The map psi with Z = {v + psi(v) : v in X}, in the given bases.

    Requires X + Y to be the whole space and Z transverse to Y.  psi acts on
    X-coordinates and lands in Y-coordinates, as the matrix Q P^-1.
    """
    if not transverse(x, y):
        raise ValueError("X and Y must be complementary")
    if z.dim != x.dim:
        raise ValueError("Z must have the dimension of X")
    b = np.hstack([x.basis, y.basis])
    coords = nm.solve(b, z.basis) if nm.backend_of(b) == nm.backend_of(z.basis) else np.linalg.solve(nm.as_float(b), nm.as_float(z.basis))
    p = coords[: x.dim]
    q = coords[x.dim :]
    if nm.backend_of(p) == nm.FLOAT:
        s = np.linalg.svd(p, compute_uv=False)
        if s[-1] <= _RANK_RTOL * max(s[0], 1e-300):
            raise ValueError("Z is not transverse to Y")
    try:
        pinv = nm.inv(p)
    except nm.SingularMatrixError as exc:
        raise ValueError("Z is not transverse to Y") from exc
    return nm.matmul(q, pinv)


def graph_of(x: Subspace, y: Subspace, psi: np.ndarray) -> Subspace:
    """The subspace {v + psi(v)} recovered from chart coordinates."""
    psi = np.asarray(psi)
    xb, yb = x.basis, y.basis
    if nm.backend_of(xb) != nm.backend_of(psi) or nm.backend_of(yb) != nm.backend_of(psi):
        xb, yb, psi = nm.as_float(xb), nm.as_float(yb), nm.as_float(psi)
    return Subspace(x.ambient, xb + nm.matmul(yb, psi))


# --- serialization -----------------------------------------------------------


def subspace_to_doc(w: Subspace) -> dict:
    return {
        "ambient_dim": w.ambient.dim,
        "form_tag": w.ambient.tag,
        "basis": nm.matrix_to_doc(w.basis),
    }


def _space_from_tag(dim: int, tag: str, backend: str) -> BilinearSpace:
    n = (dim + 1) // 2
    return even_space(n, tag, backend) if dim % 2 == 0 else odd_space(n, tag, backend)


def subspace_from_doc(doc: dict) -> Subspace:
    basis = nm.matrix_from_doc(doc["basis"])
    space = _space_from_tag(doc["ambient_dim"], doc["form_tag"], nm.backend_of(basis))
    return Subspace(space, basis)


def flag_to_doc(f: Flag) -> dict:
    doc = {
        "ambient_dim": f.space.dim,
        "form_tag": f.space.tag,
        "parts": {str(k): nm.matrix_to_doc(sub.basis) for k, sub in f.parts},
    }
    if f.middle is not None:
        doc["middle_plus"] = nm.matrix_to_doc(f.middle[0].basis)
        doc["middle_minus"] = nm.matrix_to_doc(f.middle[1].basis)
    return doc


def flag_from_doc(doc: dict) -> Flag:
    parts = []
    space = None
    for key, rows in doc["parts"].items():
        basis = nm.matrix_from_doc(rows)
        if space is None:
            space = _space_from_tag(doc["ambient_dim"], doc["form_tag"], nm.backend_of(basis))
        parts.append((int(key), Subspace(space, basis)))
    middle = None
    if "middle_plus" in doc:
        middle = (
            Subspace(space, nm.matrix_from_doc(doc["middle_plus"])),
            Subspace(space, nm.matrix_from_doc(doc["middle_minus"])),
        )
    return Flag(space, tuple(parts), middle)


# --- sampling helpers --------------------------------------------------------


def random_isometry(space: BilinearSpace, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """A random element of the identity component of the isometry group (float).

    exp(F K) preserves the form whenever K is skew and F^2 = Id, which holds
    for every form this module constructs.
    """
    d = space.dim
    k = rng.normal(size=(d, d)) * scale
    k = k - k.T
    return nm.matrix_exp(nm.as_float(space.form) @ k)
