"""Root data, coroots, and pinning generators for PSL(d), PSO(n,n), SO(n,n-1).

Everything here is exact: matrices carry Fraction entries and the structural
identities (brackets, group membership, conjugation scalings) are checked
with equality, never with tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import numerics as nm
from .geometry import even_space, odd_space

PSL = "psl"
PSO_EVEN = "pso"
SO_ODD = "so_odd"


@dataclass(frozen=True)
class GroupTag:
    family: str
    param: int  # d for PSL, n for the orthogonal families

    def __post_init__(self):
        if self.family not in (PSL, PSO_EVEN, SO_ODD):
            raise ValueError(f"unknown family {self.family!r}")
        least = 2
        if self.param < least:
            raise ValueError(f"parameter must be at least {least}")

    @property
    def dim(self) -> int:
        if self.family == PSL:
            return self.param
        if self.family == PSO_EVEN:
            return 2 * self.param
        return 2 * self.param - 1

    @property
    def rank(self) -> int:
        if self.family == PSL:
            return self.param - 1
        if self.family == PSO_EVEN:
            return self.param
        return self.param - 1


def psl(d: int) -> GroupTag:
    return GroupTag(PSL, d)


def pso(n: int) -> GroupTag:
    return GroupTag(PSO_EVEN, n)


def so_odd(n: int) -> GroupTag:
    """The split odd orthogonal group of signature (n, n-1)."""
    if n < 2:
        raise ValueError("need n >= 2")
    return GroupTag(SO_ODD, n)


def ambient_form(group: GroupTag):
    """The invariant form, or None for the linear family."""
    if group.family == PSO_EVEN:
        return even_space(group.param).form
    if group.family == SO_ODD:
        return odd_space(group.param).form
    return None


def _check_index(group: GroupTag, i: int) -> None:
    if not 1 <= i <= group.rank:
        raise IndexError(f"simple root index {i} out of range 1..{group.rank}")


def _frac(t) -> Fraction:
    return t if isinstance(t, Fraction) else Fraction(t)


# --- Cartan elements ---------------------------------------------------------


def cartan_algebra_element(group: GroupTag, entries) -> np.ndarray:
    """Diagonal algebra element from its free diagonal entries.

    PSL takes all d entries (trace is not normalized here); PSO(n,n) takes
    (u_1..u_n) and fills (u, -u reversed); SO(n,n-1) takes (u_1..u_{n-1}) and
    places a forced 0 in the middle.
    """
    entries = [_frac(t) for t in entries]
    if group.family == PSL:
        diag = entries
    elif group.family == PSO_EVEN:
        diag = entries + [-t for t in reversed(entries)]
    else:
        diag = entries + [Fraction(0)] + [-t for t in reversed(entries)]
    if len(diag) != group.dim:
        raise ValueError("wrong number of Cartan entries")
    out = nm.zeros((group.dim, group.dim), nm.EXACT)
    for k, t in enumerate(diag):
        out[k, k] = t
    return out


def cartan_group_element(group: GroupTag, entries) -> np.ndarray:
    """Diagonal group element; reciprocal entries are filled in for orthogonal types."""
    entries = [_frac(t) for t in entries]
    if any(t == 0 for t in entries):
        raise ValueError("Cartan entries must be invertible")
    if group.family == PSL:
        diag = entries
    elif group.family == PSO_EVEN:
        diag = entries + [1 / t for t in reversed(entries)]
    else:
        diag = entries + [Fraction(1)] + [1 / t for t in reversed(entries)]
    if len(diag) != group.dim:
        raise ValueError("wrong number of Cartan entries")
    out = nm.zeros((group.dim, group.dim), nm.EXACT)
    for k, t in enumerate(diag):
        out[k, k] = t
    return out


def scaling_path_element(n: int, s) -> np.ndarray:
    """diag(s^{n-1}, ..., s, 1, 1, 1/s, ..., s^{-(n-1)}) in PSO(n,n).

    Conjugation by this element rescales every positive simple generator by
    the same factor s: the exponents must drop by one along the first n
    entries and the last two of them must sum to one, which forces this
    exponent pattern.
    """
    s = _frac(s)
    return cartan_group_element(pso(n), [s ** (n - 1 - i) for i in range(n)])


# --- roots and coroots -------------------------------------------------------


def simple_root_value(group: GroupTag, i: int, algebra_elt) -> Fraction:
    """alpha_i evaluated on a diagonal algebra element."""
    _check_index(group, i)
    m = np.asarray(algebra_elt)
    u = [m[k, k] for k in range(group.dim)]
    n = group.param
    if group.family == PSL:
        return u[i - 1] - u[i]
    if group.family == PSO_EVEN:
        if i < n:
            return u[i - 1] - u[i]
        return u[n - 2] + u[n - 1]
    if i <= n - 2:
        return u[i - 1] - u[i]
    return u[n - 2]


def multiplicative_root_value(group: GroupTag, i: int, group_elt) -> Fraction:
    """alpha_i evaluated multiplicatively on a diagonal group element."""
    _check_index(group, i)
    a = np.asarray(group_elt)
    d = [a[k, k] for k in range(group.dim)]
    n = group.param
    if group.family == PSL:
        return d[i - 1] / d[i]
    if group.family == PSO_EVEN:
        if i < n:
            return d[i - 1] / d[i]
        return d[n - 2] * d[n - 1]
    if i <= n - 2:
        return d[i - 1] / d[i]
    return d[n - 2]


def coroot(group: GroupTag, i: int, t=1) -> np.ndarray:
    """The coroot H_{alpha_i}(t) as a diagonal matrix in the Lie algebra."""
    _check_index(group, i)
    t = _frac(t)
    n = group.param
    d = group.dim
    out = nm.zeros((d, d), nm.EXACT)

    def put(idx: int, val) -> None:
        out[idx - 1, idx - 1] += val

    if group.family == PSL:
        put(i, t)
        put(i + 1, -t)
    elif group.family == PSO_EVEN:
        if i < n:
            put(i, t)
            put(i + 1, -t)
            put(2 * n - i, t)
            put(2 * n + 1 - i, -t)
        else:
            put(n - 1, t)
            put(n, t)
            put(n + 1, -t)
            put(n + 2, -t)
    else:
        if i <= n - 2:
            put(i, t)
            put(i + 1, -t)
            put(2 * n - 1 - i, t)
            put(2 * n - i, -t)
        else:
            # short root: the coroot needs the factor 2 so that alpha(H) = 2
            put(n - 1, 2 * t)
            put(n + 1, -2 * t)
    return out


def cartan_matrix(group: GroupTag) -> np.ndarray:
    """Integers alpha_i(H_j(1)) for all pairs of simple roots."""
    r = group.rank
    out = nm.zeros((r, r), nm.EXACT)
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            out[i - 1, j - 1] = simple_root_value(group, i, coroot(group, j))
    return out


# --- pinning -----------------------------------------------------------------


def pinning_X(group: GroupTag, i: int, sign: int, t=1) -> np.ndarray:
    """Nilpotent generator of the root space for the i-th simple root."""
    _check_index(group, i)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    t = _frac(t)
    n = group.param
    d = group.dim
    out = nm.zeros((d, d), nm.EXACT)

    def put(r: int, c: int, val) -> None:
        if sign == 1:
            out[r - 1, c - 1] += val
        else:
            out[c - 1, r - 1] += val

    if group.family == PSL:
        put(i, i + 1, t)
    elif group.family == PSO_EVEN:
        if i < n:
            put(i, i + 1, t)
            put(2 * n - i, 2 * n + 1 - i, -t)
        else:
            put(n - 1, n + 1, t)
            put(n, n + 2, -t)
    else:
        if i <= n - 2:
            put(i, i + 1, t)
            put(2 * n - 1 - i, 2 * n - i, -t)
        else:
            # short root: the lowering generator carries the factor 2 so that
            # [X+, X-] equals the coroot
            scale = t if sign == 1 else 2 * t
            put(n - 1, n, scale)
            put(n, n + 1, -scale)
    return out


def pinning_x(group: GroupTag, i: int, sign: int, t=1) -> np.ndarray:
    """exp of the pinning generator, computed exactly.

    Every generator here has X^3 = 0, so exp(X) = Id + X + X^2/2; the square
    vanishes except for the short root of SO(n,n-1).
    """
    x = pinning_X(group, i, sign, t)
    sq = nm.matmul(x, x)
    return nm.identity(group.dim, nm.EXACT) + x + sq / Fraction(2)


# --- structural checks -------------------------------------------------------


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if nm.backend_of(a) != nm.EXACT or nm.backend_of(b) != nm.EXACT:
        raise nm.BackendError("brackets are checked on the rational backend only")
    return nm.matmul(a, b) - nm.matmul(b, a)


def in_algebra(group: GroupTag, x) -> bool:
    x = np.asarray(x)
    j = ambient_form(group)
    if j is None:
        return sum(x[k, k] for k in range(group.dim)) == 0
    lhs = nm.matmul(x.T, j) + nm.matmul(j, x)
    return all(v == 0 for v in lhs.ravel())


def in_group(group: GroupTag, g) -> bool:
    g = np.asarray(g)
    j = ambient_form(group)
    if j is None:
        return nm.det(g) == 1
    return bool(np.array_equal(nm.matmul(nm.matmul(g.T, j), g), j))


def check_tds(group: GroupTag, i: int) -> bool:
    """Exact verification of [H,X+]=2X+, [H,X-]=-2X-, [X+,X-]=H."""
    h = coroot(group, i)
    xp = pinning_X(group, i, 1)
    xm = pinning_X(group, i, -1)
    ok = np.array_equal(bracket(h, xp), 2 * xp)
    ok = ok and np.array_equal(bracket(h, xm), -2 * xm)
    ok = ok and np.array_equal(bracket(xp, xm), h)
    return bool(ok)


def scale_conjugate_identity(group: GroupTag, i: int, a, t) -> bool:
    """Exact check of a x+_i(t) a^-1 = x+_i(c t) with c the root value of a."""
    a = np.asarray(a)
    c = multiplicative_root_value(group, i, a)
    lhs = nm.matmul(nm.matmul(a, pinning_x(group, i, 1, t)), nm.inv(a))
    rhs = pinning_x(group, i, 1, c * _frac(t))
    return bool(np.array_equal(lhs, rhs))


# --- root datum facade -------------------------------------------------------


@dataclass(frozen=True)
class RootDatum:
    """Simple roots, coroots, and the positive chamber for one group family."""

    group: GroupTag

    @property
    def rank(self) -> int:
        return self.group.rank

    def root(self, i: int, algebra_elt) -> Fraction:
        return simple_root_value(self.group, i, algebra_elt)

    def coroot(self, i: int, t=1) -> np.ndarray:
        return coroot(self.group, i, t)

    def in_positive_chamber(self, entries) -> bool:
        """Weakly dominant diagonal entries for the family's restricted roots."""
        entries = [_frac(t) for t in entries]
        n = self.group.param
        if self.group.family == PSL:
            return all(entries[k] >= entries[k + 1] for k in range(len(entries) - 1))
        if self.group.family == PSO_EVEN:
            if len(entries) != n:
                raise ValueError("expected n entries")
            head = all(entries[k] >= entries[k + 1] for k in range(n - 2))
            return head and entries[n - 2] >= abs(entries[n - 1])
        if len(entries) != n - 1:
            raise ValueError("expected n-1 entries")
        head = all(entries[k] >= entries[k + 1] for k in range(n - 2))
        return head and entries[n - 2] >= 0
