"""Surface-group representations and the constructors the experiments feed on.

Contents: words in a genus-g surface group, linear representations with a
relator check, the symmetric-power embedding of SL(2) with its invariant
form, the inclusions of the odd orthogonal group into the even one, a
concrete Fuchsian genus-2 representation built from a regular octagon,
the rank-2 constructor from a pair of SL(2,R) representations, and affine
actions (linear part + translation cocycle) with a relator-cocycle solver.

Conventions.  SO(n,n-1) always means the antidiagonal odd form (the group
checked by lie.so_odd); SO(n,n) the antidiagonal even form.  Affine data
lives in the odd coordinates: an affine isometry is the block matrix
[[A, v], [0, 1]] with A in SO(n,n-1) and v in R^(2n-1).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from . import geometry as geo
from . import lie
from . import numerics as nm

__all__ = [
    "SurfaceGroup",
    "Word",
    "Representation",
    "AffineIsometry",
    "AffineRep",
    "principal_embedding",
    "sym_form_b",
    "monomial_split_change",
    "principal_representation",
    "iota_nn",
    "iota_nn_preimage",
    "iota_2n",
    "fuchsian_genus2",
    "dehn_twisted",
    "cyclic_rep",
    "pso22_from_pair",
    "eval_word",
    "relator_residual",
    "relator_constraint_matrix",
    "solve_relator_cocycle",
    "rep_to_doc",
    "rep_from_doc",
]


# --- words --------------------------------------------------------------------


def _reduce(letters) -> tuple:
    out: list = []
    for idx, exp in letters:
        if out and out[-1][0] == idx and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((int(idx), int(exp)))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word; letters are (generator index, exponent +-1)."""

    letters: tuple

    def __post_init__(self):
        for item in self.letters:
            idx, exp = item
            if exp not in (1, -1):
                raise ValueError("exponents must be +1 or -1")
            if idx < 0:
                raise ValueError("negative generator index")
        object.__setattr__(self, "letters", _reduce(self.letters))

    @property
    def length(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((i, -e) for i, e in reversed(self.letters)))

    def __iter__(self):
        return iter(self.letters)


@dataclass(frozen=True)
class SurfaceGroup:
    """Fundamental group of the closed orientable surface of the given genus."""

    genus: int

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("need genus >= 2")

    @property
    def generator_names(self) -> tuple:
        names = []
        for i in range(1, self.genus + 1):
            names.extend([f"a{i}", f"b{i}"])
        return tuple(names)

    @property
    def n_generators(self) -> int:
        return 2 * self.genus

    def relator(self) -> Word:
        # product of commutators [a_i, b_i]
        letters = []
        for i in range(self.genus):
            a, b = 2 * i, 2 * i + 1
            letters.extend([(a, 1), (b, 1), (a, -1), (b, -1)])
        return Word(tuple(letters))

    def word(self, text: str) -> Word:
        """Parse a space-separated word such as "a1 b1^-1 a2"."""
        names = {name: k for k, name in enumerate(self.generator_names)}
        letters = []
        for token in text.split():
            name, _, power = token.partition("^")
            if name not in names:
                raise ValueError(f"unknown generator {name!r}")
            exp = int(power) if power else 1
            if exp == 0:
                continue
            sign = 1 if exp > 0 else -1
            letters.extend([(names[name], sign)] * abs(exp))
        return Word(tuple(letters))


# --- representations ----------------------------------------------------------

RELATOR_TOL = 1e-6  # construction-time sanity bound; constructors hold ~1e-12


@dataclass(frozen=True)
class Representation:
    """Generator images for a surface group; relator must map to +-identity."""

    group: SurfaceGroup
    target: lie.GroupTag
    generators: tuple

    def __post_init__(self):
        gens = tuple(np.asarray(g) for g in self.generators)
        if len(gens) != self.group.n_generators:
            raise ValueError("one matrix per generator required")
        d = self.target.dim
        for g in gens:
            if g.shape != (d, d):
                raise ValueError(f"generator images must be {d}x{d}")
        nm.require_same_backend(*gens)
        object.__setattr__(self, "generators", gens)
        if relator_residual(self) > RELATOR_TOL:
            raise ValueError("relator image is not +-identity")

    @property
    def backend(self) -> str:
        return nm.backend_of(self.generators[0])

    @property
    def dim(self) -> int:
        return self.target.dim

    def generator_image(self, index: int, exponent: int = 1) -> np.ndarray:
        g = self.generators[index]
        return g if exponent == 1 else nm.inv(g)


@dataclass(frozen=True)
class AffineIsometry:
    """Affine map x -> Ax + v, stored as the pair (A, v)."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.linear)
        v = np.asarray(self.translation)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or v.shape != (a.shape[0],):
            raise ValueError("need a square matrix and a matching vector")
        if nm.backend_of(a) != nm.backend_of(v):
            a, v = nm.as_float(a), nm.as_float(v)
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "translation", v)

    def compose(self, other: "AffineIsometry") -> "AffineIsometry":
        return AffineIsometry(
            nm.matmul(self.linear, other.linear),
            self.translation + nm.matmul(self.linear, other.translation.reshape(-1, 1)).reshape(-1),
        )

    def inverse(self) -> "AffineIsometry":
        ainv = nm.inv(self.linear)
        return AffineIsometry(ainv, -nm.matmul(ainv, self.translation.reshape(-1, 1)).reshape(-1))

    def apply(self, x) -> np.ndarray:
        return nm.matmul(self.linear, np.asarray(x).reshape(-1, 1)).reshape(-1) + self.translation

    def block(self) -> np.ndarray:
        """The (d+1)x(d+1) block matrix [[A, v], [0, 1]]."""
        d = self.linear.shape[0]
        out = nm.zeros((d + 1, d + 1), nm.backend_of(self.linear))
        out[:d, :d] = self.linear
        out[:d, d] = self.translation
        one = Fraction(1) if nm.backend_of(self.linear) == nm.EXACT else 1.0
        out[d, d] = one
        return out

    @staticmethod
    def identity(d: int, backend: str = nm.FLOAT) -> "AffineIsometry":
        return AffineIsometry(nm.identity(d, backend), nm.zeros((d,), backend))


@dataclass(frozen=True)
class AffineRep:
    """Affine action: linear part plus one translation vector per generator."""

    linear: Representation
    cocycle: tuple

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=float) for v in self.cocycle)
        if len(vecs) != self.linear.group.n_generators:
            raise ValueError("one translation per generator required")
        d = self.linear.dim
        for v in vecs:
            if v.shape != (d,):
                raise ValueError(f"translations must have length {d}")
        # affine arithmetic runs on floats throughout
        if self.linear.backend == nm.EXACT:
            floated = replace(self.linear, generators=tuple(nm.as_float(g) for g in self.linear.generators))
            object.__setattr__(self, "linear", floated)
        object.__setattr__(self, "cocycle", vecs)
        if relator_residual(self) > RELATOR_TOL:
            raise ValueError("affine relator does not evaluate to (identity, 0)")

    @property
    def group(self) -> SurfaceGroup:
        return self.linear.group

    def generator_isometry(self, index: int, exponent: int = 1) -> AffineIsometry:
        iso = AffineIsometry(self.linear.generators[index], self.cocycle[index])
        return iso if exponent == 1 else iso.inverse()


def eval_word(rep: Union[Representation, AffineRep], w: Word):
    """Left-to-right product of generator images over a reduced word.

    Linear representations give a matrix; affine ones give an AffineIsometry,
    composed so the translation follows u(gh) = u(g) + rho(g) u(h).
    """
    if isinstance(rep, AffineRep):
        out = AffineIsometry.identity(rep.linear.dim, rep.linear.backend)
        for idx, exp in w:
            if idx >= rep.linear.group.n_generators:
                raise ValueError(f"generator index {idx} out of range")
            out = out.compose(rep.generator_isometry(idx, exp))
        return out
    out = nm.identity(rep.dim, rep.backend)
    for idx, exp in w:
        if idx >= rep.group.n_generators:
            raise ValueError(f"generator index {idx} out of range")
        out = nm.matmul(out, rep.generator_image(idx, exp))
    return out


def _matrix_gap(a, b) -> float:
    return float(np.max(np.abs(nm.as_float(a) - nm.as_float(b))))


def relator_residual(rep: Union[Representation, AffineRep]) -> float:
    """Distance from the relator image to +-identity ((identity, 0) if affine)."""
    if isinstance(rep, AffineRep):
        iso = eval_word(rep, rep.group.relator())
        eye = nm.identity(rep.linear.dim, nm.FLOAT)
        lin = _matrix_gap(iso.linear, eye)
        return max(lin, float(np.max(np.abs(nm.as_float(iso.translation)))))
    image = eval_word(rep, rep.group.relator())
    eye = nm.identity(rep.dim, nm.FLOAT)
    img = nm.as_float(image)
    return min(_matrix_gap(img, eye), _matrix_gap(img, -eye))


# --- symmetric powers of SL(2) -------------------------------------------------


def _binomial_expand(p, q, k: int, backend: str) -> np.ndarray:
    """Coefficients of (p x + q y)^k against x^(k-i) y^i."""
    out = nm.zeros((k + 1,), backend)
    for i in range(k + 1):
        c = math.comb(k, i)
        out[i] = (Fraction(c) if backend == nm.EXACT else float(c)) * p ** (k - i) * q ** i
    return out


def _convolve(u: np.ndarray, v: np.ndarray, backend: str) -> np.ndarray:
    out = nm.zeros((len(u) + len(v) - 1,), backend)
    for i, ui in enumerate(u):
        for j, vj in enumerate(v):
            out[i + j] = out[i + j] + ui * vj
    return out


def principal_embedding(d: int, a) -> np.ndarray:
    """Action of a unimodular 2x2 matrix on degree d-1 binary forms.

    Basis is the plain monomial one x^(d-1), x^(d-2) y, ..., y^(d-1); the
    matrix acts by substitution on the row vector (x, y), which makes the
    construction multiplicative.  Exact on rational input.
    """
    if d < 2:
        raise ValueError("need dimension >= 2")
    a = np.asarray(a)
    if a.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    backend = nm.backend_of(a)
    det = nm.det(a)
    if backend == nm.EXACT:
        if det != 1:
            raise ValueError("matrix must have determinant one")
    else:
        # det roundoff grows with the squared entry size
        scale = max(1.0, float(np.max(np.abs(a))) ** 2)
        if abs(det - 1.0) > 1e-9 * scale:
            raise ValueError("matrix must have determinant one")
    m = d - 1
    out = nm.zeros((d, d), backend)
    for j in range(d):
        # x^(m-j) y^j maps to (a11 x + a21 y)^(m-j) (a12 x + a22 y)^j
        left = _binomial_expand(a[0, 0], a[1, 0], m - j, backend)
        right = _binomial_expand(a[0, 1], a[1, 1], j, backend)
        out[:, j] = _convolve(left, right, backend)
    return out


def sym_form_b(d: int) -> np.ndarray:
    """Invariant bilinear form on degree d-1 forms, in the monomial basis.

    Antidiagonal with entries (-1)^j / binom(d-1, j): the area form of the
    plane, spread over symmetric tensors.  Symmetric for odd d and
    antisymmetric for even d; always preserved by principal_embedding.
    """
    if d < 2:
        raise ValueError("need dimension >= 2")
    m = d - 1
    out = nm.zeros((d, d), nm.EXACT)
    for j in range(d):
        out[j, m - j] = Fraction((-1) ** j, math.comb(m, j))
    return out


def monomial_split_change(d: int) -> np.ndarray:
    """Columns rescale the monomial basis so sym_form_b becomes antidiagonal ones.

    The scale factors are square roots of binomials, so the matrix is float.
    Conjugating a b-isometry by it lands in the group of lie.so_odd when d is
    odd (up to an overall sign of the form, which conjugation cannot see).
    """
    if d % 2 == 0:
        raise ValueError("the split odd picture needs odd dimension")
    m = d - 1
    # the middle entry pins the overall sign of the rescaled form to (-1)^(m/2)
    c = (-1) ** (m // 2)
    s = np.zeros(d)
    for j in range(d // 2 + 1):
        root = math.sqrt(math.comb(m, j))
        s[j] = root
        s[m - j] = c * (-1) ** j * root
    s[m // 2] = math.sqrt(math.comb(m, m // 2))
    return np.diag(s)


def principal_representation(rep: Representation, d: int) -> Representation:
    """Compose a PSL(2,R) representation with the degree d-1 symmetric power.

    Odd d lands in SO(n, n-1) with d = 2n-1 (antidiagonal convention, via
    monomial_split_change); even d keeps the linear tag.  Float output.
    """
    if rep.target.family != lie.PSL or rep.target.param != 2:
        raise ValueError("expected a representation into PSL(2)")
    images = []
    change = monomial_split_change(d) if d % 2 else None
    for g in rep.generators:
        tau = nm.as_float(principal_embedding(d, nm.as_float(g)))
        if change is not None:
            tau = np.linalg.solve(change, tau @ change)
        images.append(tau)
    target = lie.so_odd((d + 1) // 2) if d % 2 else lie.psl(d)
    return Representation(rep.group, target, tuple(images))


# --- inclusions among the orthogonal groups ------------------------------------


def _form_residual(g, form) -> float:
    g = nm.as_float(g)
    j = nm.as_float(form)
    return float(np.max(np.abs(g.T @ j @ g - j)))


def _require_member(tag: lie.GroupTag, g, what: str, tol: float = 1e-8) -> None:
    g = np.asarray(g)
    if g.shape != (tag.dim, tag.dim):
        raise ValueError(f"{what}: expected a {tag.dim}x{tag.dim} matrix")
    if nm.backend_of(g) == nm.EXACT:
        if not lie.in_group(tag, g):
            raise ValueError(f"{what}: matrix does not preserve the form")
    elif _form_residual(g, lie.ambient_form(tag)) > tol:
        raise ValueError(f"{what}: matrix does not preserve the form")


def _even_embedding_basis(n: int) -> np.ndarray:
    """Columns: the isometrically embedded odd basis, then the fixed vector e_n - e_(n+1)."""
    d = 2 * n - 1
    cols = geo.embed_odd(np.eye(d), "isometric")
    w0 = np.zeros(2 * n)
    w0[n - 1], w0[n] = 1.0, -1.0
    return np.column_stack([cols, w0])


def iota_nn(h) -> np.ndarray:
    """Include SO(n,n-1) into SO(n,n) as the stabilizer of e_n - e_(n+1).

    The odd space sits inside the even one as the orthocomplement of the
    fixed vector (geometry.embed_odd); the output acts as h there and
    trivially on the fixed line.  Output is float: the lone middle basis
    vector of the odd space forces a sqrt(2) normalization.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] % 2 == 0:
        raise ValueError("expected a square matrix of odd size")
    n = (h.shape[0] + 1) // 2
    _require_member(lie.so_odd(n), h, "iota_nn")
    basis = _even_embedding_basis(n)
    inner = np.eye(2 * n)
    inner[: 2 * n - 1, : 2 * n - 1] = nm.as_float(h)
    return basis @ inner @ np.linalg.inv(basis)


def iota_nn_preimage(g, tol: float = 1e-8) -> np.ndarray:
    """Recover h from iota_nn(h); errors if g does not fix e_n - e_(n+1)."""
    g = nm.as_float(np.asarray(g))
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise ValueError("expected a square matrix of even size")
    n = g.shape[0] // 2
    _require_member(lie.pso(n), g, "iota_nn_preimage", tol)
    basis = _even_embedding_basis(n)
    inner = np.linalg.solve(basis, g @ basis)
    d = 2 * n - 1
    off = max(np.max(np.abs(inner[d, :d])), np.max(np.abs(inner[:d, d])), abs(inner[d, d] - 1.0))
    if off > tol:
        raise ValueError("matrix does not fix e_n - e_(n+1)")
    return inner[:d, :d]


def iota_2n(g) -> np.ndarray:
    """View an SO(n,n) matrix inside SL(2n): the matrix itself, membership checked."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise ValueError("expected a square matrix of even size")
    _require_member(lie.pso(g.shape[0] // 2), g, "iota_2n")
    return g.copy()


# --- a Fuchsian genus-2 representation -----------------------------------------


def _mobius_to_zero(p: complex) -> np.ndarray:
    """Disk isometry sending p to the origin."""
    scale = 1.0 / math.sqrt(1.0 - abs(p) ** 2)
    return scale * np.array([[1.0, -p], [-p.conjugate(), 1.0]])


def _mobius_apply(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _disk_pairing(p: complex, q: complex, p2: complex, q2: complex) -> np.ndarray:
    """The orientation-preserving disk isometry with p -> p2 and q -> q2.

    Determined by two point pairs at equal distance: normalize both segments
    to start at the origin and rotate one onto the other.
    """
    first = _mobius_to_zero(p)
    second = _mobius_to_zero(p2)
    z = _mobius_apply(first, q)
    w = _mobius_apply(second, q2)
    if abs(abs(z) - abs(w)) > 1e-12:
        raise ValueError("point pairs are not at equal hyperbolic distance")
    half = (cmath.phase(w) - cmath.phase(z)) / 2.0
    rot = np.array([[cmath.exp(1j * half), 0.0], [0.0, cmath.exp(-1j * half)]])
    return np.linalg.inv(second) @ rot @ first


_CAYLEY = np.array([[1.0, -1j], [1.0, 1j]]) / cmath.sqrt(2j)


def _disk_to_real(g: np.ndarray) -> np.ndarray:
    out = np.linalg.inv(_CAYLEY) @ g @ _CAYLEY
    if np.max(np.abs(out.imag)) > 1e-10:
        raise ArithmeticError("conjugated matrix is not real")
    out = out.real / math.sqrt(abs(np.linalg.det(out).real))
    return -out if np.trace(out) < 0 else out


# side pairings of the regular octagon: generator k maps side source[k] onto
# side target[k] with reversed endpoints (side j runs from vertex j-1 to j)
_OCTAGON_SIDES = ((2, 0), (1, 3), (6, 4), (5, 7))


def fuchsian_genus2() -> Representation:
    """Discrete faithful genus-2 representation into PSL(2,R).

    Built from the regular octagon centered in the unit disk whose angles
    are pi/4, so that the eight corners glue to a single smooth point.  The
    vertex radius comes from cosh(R) = cot(pi/8)^2.  Each generator is the
    unique orientation-preserving isometry pairing two opposite-ish sides
    with reversed endpoints; the four of them satisfy the genus-2 relator
    to machine precision and every generator is hyperbolic.
    """
    radius = math.tanh(math.acosh(1.0 / math.tan(math.pi / 8.0) ** 2) / 2.0)
    verts = [radius * cmath.exp(1j * (2 * k + 1) * math.pi / 8.0) for k in range(8)]
    images = []
    for src, dst in _OCTAGON_SIDES:
        p, q = verts[(src - 1) % 8], verts[src]
        p2, q2 = verts[dst], verts[(dst - 1) % 8]
        images.append(_disk_to_real(_disk_pairing(p, q, p2, q2)))
    rep = Representation(SurfaceGroup(2), lie.psl(2), tuple(images))
    assert relator_residual(rep) <= 1e-9
    assert all(abs(np.trace(g)) > 2.0 for g in rep.generators)
    return rep


def dehn_twisted(rep: Representation, handle: int = 1) -> Representation:
    """Precompose with the twist a_i -> a_i, b_i -> b_i a_i on one handle.

    The substitution fixes the relator as a reduced word, so the new
    generator images satisfy it with the identical residual.
    """
    if not 1 <= handle <= rep.group.genus:
        raise ValueError("handle index out of range")
    a, b = 2 * (handle - 1), 2 * (handle - 1) + 1
    images = list(rep.generators)
    images[b] = nm.matmul(images[b], images[a])
    return replace(rep, generators=tuple(images))


def cyclic_rep(group: SurfaceGroup, target: lie.GroupTag, h, exponents: Optional[Sequence[int]] = None) -> Representation:
    """Representation through the integers: generator k maps to h^exponents[k].

    All images commute, so the relator holds exactly whatever the exponents.
    """
    h = np.asarray(h)
    if exponents is None:
        exponents = range(1, group.n_generators + 1)
    exponents = list(exponents)
    if len(exponents) != group.n_generators:
        raise ValueError("one exponent per generator required")
    backend = nm.backend_of(h)
    powers = {0: nm.identity(h.shape[0], backend)}

    def power(k: int) -> np.ndarray:
        if k not in powers:
            base = h if k > 0 else nm.inv(h)
            step = power(k - 1) if k > 0 else power(k + 1)
            powers[k] = nm.matmul(step, base)
        return powers[k]

    return Representation(group, target, tuple(power(int(e)) for e in exponents))


# --- the rank-2 constructor -----------------------------------------------------


def _pair_change_matrix() -> np.ndarray:
    """Exact change from matrix-entry coordinates to the antidiagonal-e basis.

    On 2x2 matrices with quadratic form -det, the frame (E11 - E22,
    E12 + E21, E11 + E22, E12 - E21) is orthogonal with norms (1, 1, -1, -1),
    which is the diagonalized even convention; composing with the literal
    even change lands in antidiagonal-e.  All entries rational.
    """
    s = nm.rat_array([
        [1, 0, 1, 0],
        [0, 1, 0, 1],
        [0, 1, 0, -1],
        [-1, 0, 1, 0],
    ])
    e = geo.even_change_matrix(2, "literal")
    return nm.matmul(e, nm.inv(s))


_PAIR_CHANGE = _pair_change_matrix()


def pso22_from_pair(j1: Representation, j2: Representation) -> Representation:
    """Join two PSL(2,R) representations into one SO(2,2) representation.

    The underlying action is (A, B): M -> A M B^T on 2x2 matrices, which
    preserves det; coordinates are changed so the invariant form becomes the
    antidiagonal one.  Exact when both inputs are exact.
    """
    for j in (j1, j2):
        if j.target.family != lie.PSL or j.target.param != 2:
            raise ValueError("expected representations into PSL(2)")
    if j1.group != j2.group:
        raise ValueError("representations must share their group")
    if j1.backend != j2.backend:
        raise ValueError("representations must share a backend")
    change = _PAIR_CHANGE if j1.backend == nm.EXACT else nm.as_float(_PAIR_CHANGE)
    inverse = nm.inv(change)
    images = []
    for a, b in zip(j1.generators, j2.generators):
        kron = np.kron(a, b)  # row-major entry coordinates
        images.append(nm.matmul(nm.matmul(change, kron), inverse))
    return Representation(j1.group, lie.pso(2), tuple(images))


# --- affine actions -------------------------------------------------------------


def relator_constraint_matrix(rho: Representation) -> np.ndarray:
    """Linear map sending stacked generator translations to the relator translation.

    Row blocks: for each relator letter, the product of the images of the
    preceding letters, times +identity for a positive letter and minus the
    letter's inverse image for a negative one, accumulated per generator.
    """
    d = rho.dim
    k = rho.group.n_generators
    out = np.zeros((d, k * d))
    prefix = np.eye(d)
    for idx, exp in rho.group.relator():
        g = nm.as_float(rho.generator_image(idx, exp))
        coeff = prefix if exp == 1 else -prefix @ g
        out[:, idx * d : (idx + 1) * d] += coeff
        prefix = prefix @ g
    return out


def solve_relator_cocycle(rho: Representation, seed: int = 0, tol: float = 1e-9) -> tuple:
    """Random translation vectors making the affine relator close up.

    Draws a seeded gaussian combination of an orthonormal basis of the
    constraint kernel.  If the kernel computation comes back empty (a rank
    artifact; zero is always a solution), falls back to projecting a random
    vector onto the constraint in the least-squares sense, with a warning.
    """
    if relator_residual(rho) > RELATOR_TOL:
        raise ValueError("linear part does not satisfy the relator")
    d = rho.dim
    matrix = relator_constraint_matrix(rho)
    rng = np.random.default_rng(seed)
    basis = scipy.linalg.null_space(matrix)
    if basis.shape[1] == 0:
        warnings.warn("constraint kernel came back empty; using a least-squares projection")
        raw = rng.standard_normal(matrix.shape[1])
        correction, *_ = np.linalg.lstsq(matrix, matrix @ raw, rcond=None)
        flat = raw - correction
    else:
        flat = basis @ rng.standard_normal(basis.shape[1])
    if np.max(np.abs(matrix @ flat)) > tol * max(1.0, np.max(np.abs(flat))):
        raise ArithmeticError("cocycle solve failed its residual check")
    return tuple(flat[i * d : (i + 1) * d] for i in range(rho.group.n_generators))


# --- serialization ---------------------------------------------------------------


def rep_to_doc(rep: Union[Representation, AffineRep]) -> dict:
    if isinstance(rep, AffineRep):
        doc = rep_to_doc(rep.linear)
        doc["cocycle"] = [[nm.scalar_to_doc(x) for x in v.tolist()] for v in rep.cocycle]
        return doc
    return {
        "group": {"genus": rep.group.genus},
        "target": {"family": rep.target.family, "param": rep.target.param},
        "generators": [nm.matrix_to_doc(g) for g in rep.generators],
    }


def rep_from_doc(doc: dict) -> Union[Representation, AffineRep]:
    group = SurfaceGroup(int(doc["group"]["genus"]))
    target = lie.GroupTag(doc["target"]["family"], int(doc["target"]["param"]))
    gens = tuple(nm.matrix_from_doc(rows) for rows in doc["generators"])
    rep = Representation(group, target, gens)
    if "cocycle" not in doc:
        return rep
    vecs = tuple(np.array([float(nm.scalar_from_doc(x)) for x in row]) for row in doc["cocycle"])
    return AffineRep(rep, vecs)
