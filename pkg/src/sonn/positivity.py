"""Positive unipotent elements of SO(n,n) and transversality of flag triples.

The generators are produced by a recursion on block-bordered matrices; the
same elements factor into products of pinning generators, and the two routes
are kept separate so they can be checked against each other.  Only the
generative direction is implemented: deciding whether an arbitrary unipotent
element is positive is not attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import geometry as geo
from . import lie
from . import numerics as nm


def _params_backend(values) -> str:
    return nm.FLOAT if any(isinstance(v, float) for v in values) else nm.EXACT


def _lift(v, backend: str):
    if backend == nm.EXACT:
        return v if isinstance(v, Fraction) else Fraction(v)
    return float(v)


@dataclass(frozen=True)
class PositiveParams:
    """Strictly positive parameters a_{k,l}, b_{k,l}, l = 1..k, k = 1..n-1."""

    n: int
    a: tuple
    b: tuple

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        a = tuple(tuple(row) for row in self.a)
        b = tuple(tuple(row) for row in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        for rows in (a, b):
            if len(rows) != self.n - 1:
                raise ValueError("expected n-1 parameter rows")
            for k, row in enumerate(rows, start=1):
                if len(row) != k:
                    raise ValueError(f"row {k} must have {k} entries")
                if any(not v > 0 for v in row):
                    raise ValueError("parameters must be strictly positive")

    def swapped(self) -> "PositiveParams":
        """Exchange a_{k,1} <-> b_{k,1} in every row (the middle-swap relabeling)."""
        a = tuple((rb[0],) + ra[1:] for ra, rb in zip(self.a, self.b))
        b = tuple((ra[0],) + rb[1:] for ra, rb in zip(self.a, self.b))
        return PositiveParams(self.n, a, b)

    def to_doc(self) -> dict:
        enc = nm.scalar_to_doc
        return {
            "a": [[enc(v) for v in row] for row in self.a],
            "b": [[enc(v) for v in row] for row in self.b],
        }


def random_params(n: int, rng: np.random.Generator, backend: str = nm.FLOAT) -> PositiveParams:
    """Log-uniform float parameters in [1e-2, 1e2], or small positive rationals."""

    def draw():
        if backend == nm.FLOAT:
            return float(10.0 ** rng.uniform(-2.0, 2.0))
        return Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 13)))

    a = tuple(tuple(draw() for _ in range(k)) for k in range(1, n))
    b = tuple(tuple(draw() for _ in range(k)) for k in range(1, n))
    return PositiveParams(n, a, b)


# --- the recursion -----------------------------------------------------------


def m_nk(n: int, k: int, a: Sequence, b: Sequence) -> np.ndarray:
    """The (2n) x (2n) unipotent block matrix with parameters a_1..a_k, b_1..b_k."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if len(a) != k or len(b) != k:
        raise ValueError("parameter lists must have length k")
    backend = _params_backend(list(a) + list(b))
    a = [_lift(v, backend) for v in a]
    b = [_lift(v, backend) for v in b]
    return _m_nk(n, k, a, b, backend)


def _m_nk(n: int, k: int, a: list, b: list, backend: str) -> np.ndarray:
    if n == 2:
        one = _lift(1, backend)
        zero = _lift(0, backend)
        a1, b1 = a[0], b[0]
        rows = [
            [one, a1, b1, -a1 * b1],
            [zero, one, zero, -b1],
            [zero, zero, one, -a1],
            [zero, zero, zero, one],
        ]
        if backend == nm.EXACT:
            out = np.empty((4, 4), dtype=object)
            out[:] = rows
            return out
        return np.array(rows, dtype=float)
    if k <= n - 2:
        inner = _m_nk(n - 1, k, a, b, backend)
        return _pad(inner, backend)
    inner = _m_nk(n - 1, n - 2, a[:-1], b[:-1], backend)
    return _border(inner, a[-1], b[-1], backend)


def _pad(inner: np.ndarray, backend: str) -> np.ndarray:
    d = inner.shape[0] + 2
    out = nm.identity(d, backend)
    out[1 : d - 1, 1 : d - 1] = inner
    return out


def _border(inner: np.ndarray, a_new, b_new, backend: str) -> np.ndarray:
    m = inner.shape[0]
    d = m + 2
    out = nm.identity(d, backend)
    out[1 : d - 1, 1 : d - 1] = inner
    out[0, 1] = a_new + b_new
    for j in range(1, m):
        out[0, 1 + j] = a_new * inner[0, j]
    for j in range(m - 1):
        out[1 + j, d - 1] = -b_new * inner[j, m - 1]
    out[m, d - 1] = -(a_new + b_new)
    out[0, d - 1] = -a_new * b_new * inner[0, m - 1]
    return out


def m_nk_factored(n: int, k: int, a: Sequence, b: Sequence) -> np.ndarray:
    """Independent route: the product of pinning generators for the same element.

    (prod_{i=n-k}^{n-2} x+_i(a_{n-i})) (x+_{n-1}(a_1) x+_n(b_1))
    (prod_{i=n-2}^{n-k} x+_i(b_{n-i})); kept separate from the recursion so
    the two constructions can be compared exactly.  Always returned on the
    exact backend; float parameters are lifted to their exact binary values.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if len(a) != k or len(b) != k:
        raise ValueError("parameter lists must have length k")
    group = lie.pso(n)
    out = nm.identity(2 * n, nm.EXACT)
    for i in range(n - k, n - 1):
        out = nm.matmul(out, lie.pinning_x(group, i, 1, a[n - i - 1]))
    out = nm.matmul(out, lie.pinning_x(group, n - 1, 1, a[0]))
    out = nm.matmul(out, lie.pinning_x(group, n, 1, b[0]))
    for i in range(n - 2, n - k - 1, -1):
        out = nm.matmul(out, lie.pinning_x(group, i, 1, b[n - i - 1]))
    return out


def m_n(params: PositiveParams) -> np.ndarray:
    """The positive unipotent element: the ordered product of the m_nk blocks."""
    n = params.n
    out = None
    for k in range(1, n):
        factor = m_nk(n, k, params.a[k - 1], params.b[k - 1])
        out = factor if out is None else nm.matmul(out, factor)
    if nm.backend_of(out) == nm.EXACT:
        if not lie.in_group(lie.pso(n), out):
            raise ArithmeticError("recursion produced a matrix outside SO(n,n)")
    return out


def middle_swap_matrix(n: int, backend: str = nm.EXACT) -> np.ndarray:
    """The orientation-reversing swap of e_n and e_{n+1} (an involution)."""
    s = nm.identity(2 * n, backend)
    s[[n - 1, n]] = s[[n, n - 1]]
    return s


# --- flag triples ------------------------------------------------------------


def lower_flag(space: geo.BilinearSpace) -> geo.Flag:
    """The flag of coordinate spans anchored at the last basis vector."""
    n = space.n
    d = space.dim
    parts = []
    for k in range(1, n):
        sub = geo.coordinate_span(space, range(d - k + 1, d + 1))
        parts.append((k, sub))
        parts.append((d - k, geo.perp(sub)))
    plus, minus = geo.extend_isotropic(geo.coordinate_span(space, range(n + 2, d + 1)))
    return geo.Flag(space, tuple(parts), (plus, minus))


def move_flag(g, flag: geo.Flag) -> geo.Flag:
    """Apply a linear map to every part; middle planes are relabeled by sign."""
    parts = tuple((k, geo.apply_map(g, sub)) for k, sub in flag.parts)
    middle = None
    if flag.middle is not None:
        img0 = geo.apply_map(g, flag.middle[0])
        img1 = geo.apply_map(g, flag.middle[1])
        s0 = geo.tau_sign(img0)
        if s0 == geo.tau_sign(img1):
            raise ArithmeticError("middle images acquired equal signs")
        middle = (img0, img1) if s0 == 1 else (img1, img0)
    return geo.Flag(flag.space, parts, middle)


def make_positive_triple(params: PositiveParams):
    """(F+, u F-, F-) for u the positive element with the given parameters."""
    u = m_n(params)
    space = geo.even_space(params.n, geo.TAG_E, nm.backend_of(u))
    upper = geo.standard_flag(space)
    lower = lower_flag(space)
    return upper, move_flag(u, lower), lower


def triple_from_unipotent(u: np.ndarray, space: geo.BilinearSpace):
    """(F+, u F-, F-) for an arbitrary group element u."""
    upper = geo.standard_flag(space)
    lower = lower_flag(space)
    return upper, move_flag(u, lower), lower


def _middle_pieces(y: geo.Flag, z: geo.Flag, x: geo.Flag):
    n = y.space.n
    d = y.space.dim
    if y.middle is None:
        raise ValueError("first flag is missing its middle planes")
    x_part = x.part(n - 1) if n >= 2 else None
    z_part = z.part(n - 1)
    if n == 2:
        v = z_part  # the (n+2)-part is the whole space
    else:
        v = geo.intersect(z_part, y.part(n + 2))
    return x_part, v, y.middle


def check_middle_transversality(y: geo.Flag, z: geo.Flag, x: geo.Flag) -> tuple[bool, bool]:
    """Both middle sums X^(n-1) + (Z^(n-1) cap Y^(n+2)) + Y_{+/-}^(n).

    Returns False for a branch whenever the pieces fail to sum directly, in
    particular when the intersection line degenerates to a higher dimension.
    """
    x_part, v, (plus, minus) = _middle_pieces(y, z, x)
    out = []
    for mid in (plus, minus):
        if x_part.dim + v.dim + mid.dim != y.space.dim:
            out.append(False)
            continue
        out.append(geo.transverse(x_part, v, mid))
    return out[0], out[1]


def middle_margins(y: geo.Flag, z: geo.Flag, x: geo.Flag) -> tuple[float, float]:
    """Relative smallest singular values of the two stacked middle sums."""
    x_part, v, (plus, minus) = _middle_pieces(y, z, x)
    out = []
    for mid in (plus, minus):
        if x_part.dim + v.dim + mid.dim != y.space.dim:
            out.append(0.0)
            continue
        out.append(geo.transversality_margin(x_part, v, mid))
    return out[0], out[1]


def trial_record(n: int, rng: np.random.Generator, backend: str = nm.FLOAT) -> dict:
    """One sampled positive triple, summarized as a JSON-ready record."""
    params = random_params(n, rng, backend)
    y, z, x = make_positive_triple(params)
    ok_plus, ok_minus = check_middle_transversality(y, z, x)
    margins = middle_margins(y, z, x)
    return {
        "n": n,
        "params": params.to_doc(),
        "transversal_plus": bool(ok_plus),
        "transversal_minus": bool(ok_minus),
        "min_singular_value": float(min(margins)),
    }
