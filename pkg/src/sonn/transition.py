"""The flat geometry as a rescaling limit of the curved one.

Everything here happens in the affine-chart basis: the diagonalized even
coordinates whose leading 2n-1 directions carry the odd form diag(I_n,
-I_{n-1}) and whose last direction is the extra negative one, so the full
form is diag(I_n, -I_n).  In that basis the rescaling c_r is diagonal, an
isometry of the even space splits into the familiar four blocks, and
conjugation by c_r scales the off-diagonal blocks by 1/r and r.

Public entry points that accept odd-space isometries or translation vectors
take them in the package-standard antidiagonal coordinates and convert at
the boundary; the chart-facing helpers (c_r, block_decompose, rescaled)
say so in their docstrings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import numerics as nm
from . import geometry as geo
from . import lie
from .invariants import GapError, length_H, margulis
from .reps import AffineIsometry

# below this the corner entry cannot anchor the projective sign choice
_CORNER_TOL = 1e-9
_MEMBER_TOL = 1e-8

# One-time global calibration between the two translation-length conventions.
# The curved signed length counts twice the geodesic displacement along the
# slow axis (in the split n=2 case it is the full left-minus-right length
# difference), while the flat invariant measures the displacement itself.
# The derivative comparison therefore halves the curved ratio; the boost
# oracle in the tests pins this factor.
LENGTH_CALIBRATION = 0.5


def _chart_form(n: int) -> np.ndarray:
    return nm.as_float(geo.even_space(n, geo.TAG_EPRIME, nm.FLOAT).form)


def _odd_form(n: int) -> np.ndarray:
    return nm.as_float(geo.odd_space(n, geo.TAG_EPRIME, nm.FLOAT).form)


def c_r(n: int, r) -> np.ndarray:
    """The rescaling diag(1/r, ..., 1/r, 1) of the affine chart.

    Exact for integer or Fraction r, float otherwise.  Only defined for
    r > 0 (the chart collapses at 0).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if isinstance(r, (int, Fraction)):
        if r <= 0:
            raise ValueError("rescaling needs r > 0")
        out = nm.identity(2 * n, nm.EXACT)
        for i in range(2 * n - 1):
            out[i, i] = Fraction(1, 1) / r
        return out
    r = float(r)
    if not r > 0:
        raise ValueError("rescaling needs r > 0")
    return np.diag([1.0 / r] * (2 * n - 1) + [1.0])


def rescaled(g, r) -> np.ndarray:
    """c_r g c_r^{-1}, computed blockwise: scales v by 1/r and w by r.

    g is a square matrix in the affine-chart basis.  Exact whenever the
    entries and r are exact; the identity with the literal triple product
    is an algebraic one, so no matrix multiplication is needed.
    """
    g = np.asarray(g)
    d = g.shape[0] - 1
    if isinstance(r, (int, Fraction)):
        if r <= 0:
            raise ValueError("rescaling needs r > 0")
    elif not float(r) > 0:
        raise ValueError("rescaling needs r > 0")
    if nm.backend_of(g) == nm.FLOAT:
        r = float(r)
    out = g.copy()
    out[:d, d] = g[:d, d] / r
    out[d, :d] = g[d, :d] * r
    return out


@dataclass(frozen=True)
class BlockParts:
    """The four chart blocks of an even isometry, sign-normalized.

    The projective sign is fixed by making the corner positive; when the
    corner is too small to anchor the choice, the largest entry decides and
    the fallback flag is set.  Iterates as the bare (a, v, w, b) tuple.
    """

    a: np.ndarray
    v: np.ndarray
    w: np.ndarray
    b: object
    flipped: bool = False
    fallback: bool = False

    def __iter__(self):
        return iter((self.a, self.v, self.w, self.b))


def block_decompose(g) -> BlockParts:
    """Split a chart-basis matrix into (A, v, w, b) per the affine pattern."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2 or g.shape[0] < 4:
        raise ValueError("expected an even-size square matrix")
    d = g.shape[0] - 1
    corner = g[d, d]
    fallback = abs(corner) <= _CORNER_TOL
    if fallback:
        flat = np.abs(nm.as_float(g)).argmax()
        anchor = g[flat // (d + 1), flat % (d + 1)]
    else:
        anchor = corner
    flipped = anchor < 0
    if flipped:
        g = -g
    return BlockParts(a=g[:d, :d].copy(), v=g[:d, d].copy(), w=g[d, :d].copy(),
                      b=g[d, d], flipped=flipped, fallback=fallback)


def assemble_blocks(a, v, w, b) -> np.ndarray:
    """Inverse of block_decompose (up to the projective sign)."""
    a = np.asarray(a)
    d = a.shape[0]
    out = nm.zeros((d + 1, d + 1), nm.backend_of(a))
    out[:d, :d] = a
    out[:d, d] = v
    out[d, :d] = w
    out[d, d] = b
    return out


def _require_odd_member(h) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] % 2 == 0:
        raise ValueError("expected an odd-size square matrix")
    n = (h.shape[0] + 1) // 2
    group = lie.so_odd(n)
    if nm.backend_of(h) == nm.EXACT:
        if not lie.in_group(group, h):
            raise ValueError("matrix does not preserve the odd form")
        return nm.as_float(h)
    hf = nm.as_float(h)
    j = nm.as_float(lie.ambient_form(group))
    scale = max(1.0, float(np.abs(hf).max()) ** 2)
    if np.abs(hf.T @ j @ hf - j).max() > _MEMBER_TOL * scale:
        raise ValueError("matrix does not preserve the odd form")
    return hf


def include_odd(h) -> np.ndarray:
    """The even-space isometry acting as h on the flat slice, chart basis.

    h comes in the package-standard antidiagonal odd coordinates; the output
    is block-diagonal (h', 1) in the chart, where h' is h rewritten in the
    diagonalized odd basis.  Fixes the extra negative direction.
    """
    hf = _require_odd_member(h)
    d = hf.shape[0]
    hp = geo.change_basis_matrix(hf, geo.TAG_F, geo.TAG_EPRIME)
    out = np.zeros((d + 1, d + 1))
    out[:d, :d] = hp
    out[d, d] = 1.0
    return out


def cocycle_generator(u) -> np.ndarray:
    """The even-algebra block built from a translation direction.

    u is a vector in antidiagonal odd coordinates; the output pairs the
    chart copy of u against the flat slice: zeros except for the last
    column u' and last row (J u')^T.  Anti-self-adjoint for the chart form
    exactly, by construction; violations raise since they mean a bug.
    """
    u = nm.as_float(np.asarray(u)).reshape(-1)
    d = u.shape[0]
    if d % 2 == 0:
        raise ValueError("translation directions have odd length")
    n = (d + 1) // 2
    up = geo.change_basis(u, geo.TAG_F, geo.TAG_EPRIME)
    y = np.zeros((d + 1, d + 1))
    y[:d, d] = up
    y[d, :d] = _odd_form(n) @ up
    q = _chart_form(n)
    if np.count_nonzero(y.T @ q + q @ y):
        raise ArithmeticError("generator is not anti-self-adjoint for the chart form")
    return y


@dataclass(frozen=True)
class TransitionPath:
    """Differentiable family r -> g_r of even isometries based at the
    inclusion of h, with translation-direction u.

    base and direction use antidiagonal odd coordinates; at(r) returns the
    chart-basis matrix exp(r Y) g_0.  Immutable, so evaluations can run in
    parallel.
    """

    base: np.ndarray
    direction: np.ndarray
    base_chart: np.ndarray
    generator: np.ndarray

    def at(self, r: float) -> np.ndarray:
        if r == 0:
            return self.base_chart.copy()
        return nm.matrix_exp(float(r) * self.generator) @ self.base_chart

    def affine_limit(self) -> AffineIsometry:
        return AffineIsometry(self.base, self.direction)


def path_from_cocycle(h, u) -> TransitionPath:
    """The straight exponential path through the inclusion of h toward u."""
    hf = _require_odd_member(h)
    uf = nm.as_float(np.asarray(u)).reshape(-1)
    if uf.shape[0] != hf.shape[0]:
        raise ValueError("translation length must match the matrix size")
    return TransitionPath(base=hf, direction=uf, base_chart=include_odd(hf),
                          generator=cocycle_generator(uf))


def geometric_radii(start: float = 0.1, levels: int = 6) -> tuple:
    """Halving sequence start, start/2, ..., the default extrapolation grid."""
    if not start > 0:
        raise ValueError("need a positive starting radius")
    if levels < 2:
        raise ValueError("need at least two levels")
    return tuple(start * 0.5**k for k in range(levels))


def _extrapolate(radii: Sequence[float], values: list) -> tuple:
    """Polynomial extrapolation of values(r) to r = 0 (Neville at zero).

    Returns (limit, error estimate); raises if the tableau diverges.
    """
    rs = [float(r) for r in radii]
    k = len(rs)
    tableau = [[None] * k for _ in range(k)]
    for i in range(k):
        tableau[i][0] = np.asarray(values[i], dtype=float)
    for m in range(1, k):
        for i in range(m, k):
            lo, hi = rs[i], rs[i - m]
            tableau[i][m] = (hi * tableau[i][m - 1] - lo * tableau[i - 1][m - 1]) / (hi - lo)
    # successive diagonal entries are the limit estimates as levels are added;
    # their differences shrink fast for data polynomial in r and grow otherwise
    diffs = [float(np.max(np.abs(tableau[m][m] - tableau[m - 1][m - 1])))
             for m in range(1, k)]
    limit = tableau[k - 1][k - 1]
    err = diffs[-1] if diffs else math.inf
    if len(diffs) >= 3 and diffs[-1] > max(diffs[0], 1e-6):
        raise ArithmeticError(
            f"extrapolation diverges: correction grew to {diffs[-1]:.3e}")
    return limit, err


def limit_rep(path, radii: Optional[Sequence[float]] = None) -> tuple:
    """Extrapolated limit of the rescaled path, as an affine isometry.

    radii must decrease strictly to small positive values (default the
    halving grid).  Returns (AffineIsometry, error estimate); the linear
    part and translation come back in antidiagonal odd coordinates.
    """
    if radii is None:
        radii = geometric_radii()
    radii = [float(r) for r in radii]
    if len(radii) < 2 or any(r <= 0 for r in radii) or \
       any(radii[i + 1] >= radii[i] for i in range(len(radii) - 1)):
        raise ValueError("radii must be strictly decreasing and positive")
    samples = [rescaled(path.at(r), r) for r in radii]
    limit, err = _extrapolate(radii, samples)
    d = limit.shape[0] - 1
    floor = max(10.0 * err, 1e-9)
    if np.abs(limit[d, :d]).max() > floor or abs(limit[d, d] - 1.0) > floor:
        raise ArithmeticError("rescaled limit is not an affine-form matrix")
    linear = geo.change_basis_matrix(limit[:d, :d], geo.TAG_EPRIME, geo.TAG_F)
    translation = geo.change_basis(limit[:d, d], geo.TAG_EPRIME, geo.TAG_F)
    return AffineIsometry(linear, translation), err


@dataclass(frozen=True)
class ExperimentResult:
    """Outcome of the rescaled-length derivative experiment.

    radii/values hold the surviving samples of length(g_r)/r; dropped lists
    radii where the middle gap failed.  order_estimate is the fitted slope
    of the error against r (inf when the error sits at machine floor).
    """

    radii: tuple
    values: tuple
    dropped: tuple
    alpha: float
    limit: float
    error_estimate: float
    discrepancy: float
    order_estimate: float

    def csv_rows(self) -> list:
        rows = [("r", "L_over_r", "alpha", "abs_err")]
        for r, val in zip(self.radii, self.values):
            rows.append((r, val, self.alpha, abs(val - self.alpha)))
        return rows

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "extrapolated_limit": self.limit,
            "discrepancy": self.discrepancy,
            "error_estimate": self.error_estimate,
            "order_estimate": self.order_estimate,
            "radii_used": list(self.radii),
            "radii_dropped": list(self.dropped),
        }


def derivative_length_experiment(h, u, radii: Optional[Sequence[float]] = None) -> ExperimentResult:
    """Compare lim length(g_r)/r against the affine translation invariant.

    The reported per-radius ratios carry the one-time calibration factor,
    so they converge to the flat invariant itself.  Radii where the
    rescaled element loses its middle gap are dropped (partial result); if
    none survive, the gap error propagates.
    """
    if radii is None:
        radii = geometric_radii()
    path = path_from_cocycle(h, u)
    alpha = margulis(path.affine_limit())
    kept, values, dropped = [], [], []
    for r in radii:
        g_std = geo.change_basis_matrix(path.at(r), geo.TAG_EPRIME, geo.TAG_E)
        try:
            values.append(LENGTH_CALIBRATION * length_H(g_std) / float(r))
            kept.append(float(r))
        except GapError:
            dropped.append(float(r))
    if len(kept) < 2:
        raise GapError("the middle gap failed along the whole radius grid")
    limit_arr, err = _extrapolate(kept, [np.array(v) for v in values])
    limit = float(limit_arr)
    errs = [abs(v - alpha) for v in values]
    fit = [(math.log(r), math.log(e)) for r, e in zip(kept, errs) if e > 1e-13]
    if len(fit) >= 2:
        xs, ys = zip(*fit)
        order = float(np.polyfit(xs, ys, 1)[0])
    else:
        order = math.inf
    return ExperimentResult(radii=tuple(kept), values=tuple(values),
                            dropped=tuple(dropped), alpha=alpha, limit=limit,
                            error_estimate=err, discrepancy=abs(limit - alpha),
                            order_estimate=order)
