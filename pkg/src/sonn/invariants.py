"""Sign-refined projections, length functions, and Margulis invariants.

Even-family elements act on the antidiagonal form; odd and affine data use
the antidiagonal odd form, matching the rest of the package.  The refined
middle entry of an even projection takes its sign from the orientation class
(tau) of the top-n singular or eigen subspace, and the translation length
doubles that entry.  Affine isometries carry a Margulis invariant measured
against the neutral eigendirection.

The neutral direction is oriented by two independent recipes that must agree:
a determinant over a paired eigenbasis, and the null-line labeling of the
middle vector after embedding into the even space.  Orientation determinants
are taken in odd coordinates with a parity factor (-1)^(n-1), which is what
makes the diagonalized n=2 calibration example come out to +e''_2 and keeps
the two recipes coherent for every n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import numerics as nm
from . import geometry as geo
from . import lie
from .reps import AffineIsometry

# Below this Lyapunov gap the length and Margulis invariants are undefined;
# callers that survey many elements catch GapError and report "marginal".
GAP_TOL = 1e-6

# Two log-moduli (or log singular values) closer than this are treated as a
# tie: the middle sign is reported as 0 with the tie flag set.
TIE_TOL = 1e-9

_MEMBER_TOL = 1e-8
_KIND_CARTAN = "cartan"
_KIND_LYAPUNOV = "lyapunov"


class GapError(ValueError):
    """A projection failed the strict gap required by a length invariant."""

    def __init__(self, message: str, indices: tuple = ()):
        super().__init__(message)
        self.indices = indices


# --- projections --------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionVector:
    """A Cartan or Lyapunov projection with the refined middle sign.

    For the linear family the entries are the full weakly decreasing list of
    logarithms, normalized to sum zero.  For the odd orthogonal family they
    are the full list with the middle entry forced to zero.  For the even
    orthogonal family the entries are the refined length-n vector: the first
    n-1 entries dominate the absolute value of the last, whose sign is
    middle_sign.  A middle sign of 0 always comes with the tie flag; the nth
    entry then carries the unsigned magnitude.
    """

    group: lie.GroupTag
    kind: str
    entries: tuple
    middle_sign: Optional[int] = None
    tie: bool = False

    def __post_init__(self):
        if self.kind not in (_KIND_CARTAN, _KIND_LYAPUNOV):
            raise ValueError(f"unknown projection kind {self.kind!r}")
        e = self.entries
        slack = 1e-12 * max(1.0, max((abs(x) for x in e), default=0.0))
        if self.group.family == lie.PSO_EVEN:
            n = self.group.param
            if len(e) != n:
                raise ValueError("refined projection needs n entries")
            if self.middle_sign not in (-1, 0, 1):
                raise ValueError("middle sign must be -1, 0, or +1")
            body = e[: n - 1]
            if any(body[i] < body[i + 1] - slack for i in range(len(body) - 1)):
                raise ValueError("entries must be weakly decreasing")
            if n >= 2 and body[-1] < abs(e[-1]) - slack:
                raise ValueError("entry n-1 must dominate |entry n|")
            if self.middle_sign == 0:
                if not self.tie:
                    raise ValueError("zero middle sign requires the tie flag")
            elif self.middle_sign * e[-1] < -slack:
                raise ValueError("middle sign contradicts the last entry")
            return
        if self.middle_sign is not None:
            raise ValueError("middle sign applies to the even family only")
        if len(e) != self.group.dim:
            raise ValueError("expected one entry per matrix dimension")
        if any(e[i] < e[i + 1] - slack for i in range(len(e) - 1)):
            raise ValueError("entries must be weakly decreasing")
        if abs(sum(e)) > 1e-9 * max(1.0, max(abs(x) for x in e)):
            raise ValueError("entries must sum to zero")
        if self.group.family == lie.SO_ODD and e[self.group.param - 1] != 0.0:
            raise ValueError("odd family forces a zero middle entry")


def _as_member(g, group: lie.GroupTag) -> np.ndarray:
    gf = nm.as_float(np.asarray(g))
    if gf.ndim != 2 or gf.shape[0] != gf.shape[1]:
        raise ValueError("expected a square matrix")
    if gf.shape[0] != group.dim:
        raise ValueError(f"expected size {group.dim} for {group.family}({group.param})")
    form = lie.ambient_form(group)
    if form is not None:
        j = nm.as_float(form)
        scale = max(1.0, float(np.abs(gf).max()) ** 2)
        if np.abs(gf.T @ j @ gf - j).max() > _MEMBER_TOL * scale:
            raise ValueError("matrix does not preserve the tagged form")
    return gf


def _antisymmetrize(logs: np.ndarray) -> np.ndarray:
    # true values satisfy logs[i] = -logs[d-1-i]; averaging removes float noise
    return (logs - logs[::-1]) / 2.0


def _log_moduli(gf: np.ndarray) -> np.ndarray:
    eigs = np.linalg.eigvals(gf)
    if np.min(np.abs(eigs)) <= 1e-300:
        raise nm.SingularMatrixError("projection of a singular matrix")
    return np.sort(np.log(np.abs(eigs)))[::-1]


def _schur_select(m: np.ndarray, lo: float, hi: float, count: int) -> np.ndarray:
    """Orthonormal basis of the invariant subspace with log-moduli in (lo, hi)."""

    def band(re, im, _lo=lo, _hi=hi):
        return _lo < math.log(max(np.hypot(re, im), 1e-300)) < _hi

    _, z, sdim = scipy.linalg.schur(m, output="real", sort=band)
    if sdim != count:
        raise ArithmeticError(
            f"modulus band ({lo:.6g}, {hi:.6g}) selected {sdim} eigenvalues, expected {count}")
    return z[:, :count].copy()


def _tau_or_none(n: int, basis: np.ndarray) -> Optional[int]:
    space = geo.even_space(n, geo.TAG_E, nm.FLOAT)
    try:
        return geo.tau_sign(geo.Subspace(space, basis))
    except ValueError:
        warnings.warn("top-n subspace is not isotropic at tolerance; "
                      "reporting an unresolved middle sign", RuntimeWarning,
                      stacklevel=3)
        return None


def _refined(group: lie.GroupTag, kind: str, logs: np.ndarray,
             top_basis) -> ProjectionVector:
    """Assemble the even-family projection; top_basis is a callable for lazy work."""
    n = group.param
    base = _antisymmetrize(logs)
    body = tuple(base[: n - 1])
    mag = float(base[n - 1])
    if 2.0 * mag <= TIE_TOL:
        return ProjectionVector(group, kind, body + (0.0,), middle_sign=0, tie=True)
    sign = _tau_or_none(n, top_basis())
    if sign is None:
        return ProjectionVector(group, kind, body + (mag,), middle_sign=0, tie=True)
    return ProjectionVector(group, kind, body + (sign * mag,), middle_sign=sign)


def cartan(g, group: lie.GroupTag) -> ProjectionVector:
    """Log singular values, refined by the top-n singular subspace if even."""
    gf = _as_member(g, group)
    u, sing, _ = nm.svd(gf)
    logs = np.log(sing)
    if group.family == lie.PSL:
        return ProjectionVector(group, _KIND_CARTAN, tuple(logs - logs.mean()))
    if group.family == lie.SO_ODD:
        return ProjectionVector(group, _KIND_CARTAN, tuple(_antisymmetrize(logs)))
    return _refined(group, _KIND_CARTAN, logs, lambda: u[:, : group.param])


def lyapunov(g, group: lie.GroupTag) -> ProjectionVector:
    """Log eigenvalue moduli, refined by the top-n eigen subspace if even."""
    gf = _as_member(g, group)
    logs = _log_moduli(gf)
    if group.family == lie.PSL:
        return ProjectionVector(group, _KIND_LYAPUNOV, tuple(logs - logs.mean()))
    if group.family == lie.SO_ODD:
        return ProjectionVector(group, _KIND_LYAPUNOV, tuple(_antisymmetrize(logs)))
    n = group.param
    cut = float(logs[n - 1] + logs[n]) / 2.0

    def top():
        return _schur_select(gf, cut, math.inf, n)

    return _refined(group, _KIND_LYAPUNOV, logs, top)


def length_H(g) -> float:
    """Signed translation length along the slow axis: twice the refined entry.

    Demands the strict gap between the (n-1)st entry and the middle magnitude;
    below GAP_TOL the value is undefined and GapError names the entries.
    """
    gf = np.asarray(g)
    if gf.ndim != 2 or gf.shape[0] != gf.shape[1] or gf.shape[0] % 2:
        raise ValueError("expected an even-size square matrix")
    n = gf.shape[0] // 2
    pv = lyapunov(gf, lie.pso(n))
    gap = pv.entries[n - 2] - abs(pv.entries[n - 1])
    if gap <= GAP_TOL:
        raise GapError(
            f"Lyapunov gap between entries {n - 1} and {n} is {gap:.3e} "
            f"(needs > {GAP_TOL:g})", indices=(n - 1, n))
    return 2.0 * pv.entries[n - 1]


# --- eigenspace frames ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenFrame:
    """Attracting/repelling eigenspace pair plus the middle data of an element.

    Hyperbolic frames carry the two middle null lines, labeled so that
    v_plus + l_plus is a positive isotropic n-plane.  Affine frames carry the
    two-dimensional generalized fixed space of the affine matrix and its
    intersection l0 with the linear slice.
    """

    context: str
    v_plus: geo.Subspace
    v_minus: geo.Subspace
    l_plus: Optional[geo.Subspace] = None
    l_minus: Optional[geo.Subspace] = None
    v0: Optional[np.ndarray] = None
    l0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.context not in ("hyperbolic", "affine"):
            raise ValueError(f"unknown context {self.context!r}")
        n = self.n
        for v in (self.v_plus, self.v_minus):
            if v.dim != n - 1:
                raise ValueError("expected (n-1)-dimensional eigenspaces")
            if not v.is_isotropic():
                raise ArithmeticError("eigenspace sum is not isotropic")
        if self.context == "hyperbolic":
            if self.l_plus is None or self.l_minus is None:
                raise ValueError("hyperbolic frame needs both middle lines")
            if geo.tau_sign(geo.span_sum(self.v_plus, self.l_plus)) != 1:
                raise ArithmeticError("middle labeling violates positivity")
        else:
            if self.v0 is None or self.l0 is None:
                raise ValueError("affine frame needs v0 and l0")
            if self.v0.shape != (2 * n, 2):
                raise ValueError("v0 must have two homogeneous columns")
            q = nm.as_float(self.v_plus.ambient.form)
            if float(self.l0 @ q @ self.l0) <= 0:
                raise ArithmeticError("neutral direction must have positive norm")
            # l0 is the linear slice of v0
            hom = np.concatenate([self.l0, [0.0]])
            _, res, _, _ = np.linalg.lstsq(self.v0, hom, rcond=None)
            if res.size and res[0] > 1e-12 * max(1.0, float(hom @ hom)):
                raise ArithmeticError("l0 does not lie in v0")

    @property
    def n(self) -> int:
        d = self.v_plus.ambient.dim
        return d // 2 if self.context == "hyperbolic" else (d + 1) // 2


def _middle_null_lines(w_basis: np.ndarray, q: np.ndarray) -> tuple:
    """The two null directions of a two-plane of mixed signature."""
    gram = w_basis.T @ q @ w_basis
    vals, vecs = np.linalg.eigh((gram + gram.T) / 2.0)
    if vals[0] >= 0 or vals[1] <= 0:
        raise ArithmeticError("middle plane is not of mixed signature")
    ratio = math.sqrt(vals[1] / -vals[0])
    out = []
    for s in (ratio, -ratio):
        v = w_basis @ (vecs @ np.array([s, 1.0]))
        out.append(v / np.linalg.norm(v))
    return tuple(out)


def _hyperbolic_frame(g) -> EigenFrame:
    gf = np.asarray(g)
    if gf.shape[0] % 2:
        raise ValueError("hyperbolic context expects an even-size matrix")
    n = gf.shape[0] // 2
    gf = _as_member(gf, lie.pso(n))
    logs = _log_moduli(gf)
    report = np.round(logs, 9).tolist()
    if logs[n - 2] - logs[n - 1] <= GAP_TOL or logs[n] - logs[n + 1] <= GAP_TOL:
        raise GapError(f"no modulus gap around the middle pair: {report}",
                       indices=(n - 1, n))
    hi = float(logs[n - 2] + logs[n - 1]) / 2.0
    lo = float(logs[n] + logs[n + 1]) / 2.0
    space = geo.even_space(n, geo.TAG_E, nm.FLOAT)
    vp_basis = _schur_select(gf, hi, math.inf, n - 1)
    vp = geo.Subspace(space, vp_basis)
    vm = geo.Subspace(space, _schur_select(gf, -math.inf, lo, n - 1))
    wmid = _schur_select(gf, lo, hi, 2)
    # the middle plane pairs to zero with v_plus, so each null line extends
    # it to an isotropic n-plane; the two extensions land in opposite
    # orientation classes and the positive one gets the plus label
    q = nm.as_float(space.form)
    line_a, line_b = _middle_null_lines(wmid, q)
    signs = [geo.tau_sign(geo.Subspace(space, np.column_stack([vp_basis, l])))
             for l in (line_a, line_b)]
    if set(signs) != {1, -1}:
        raise ArithmeticError("middle null lines do not split the orientation classes")
    l_plus, l_minus = (line_a, line_b) if signs[0] == 1 else (line_b, line_a)
    return EigenFrame("hyperbolic", vp, vm,
                      l_plus=geo.Subspace(space, l_plus),
                      l_minus=geo.Subspace(space, l_minus))


def _affine_frame(g: AffineIsometry) -> EigenFrame:
    a = nm.as_float(g.linear)
    d = a.shape[0]
    n = (d + 1) // 2
    a = _as_member(a, lie.so_odd(n))
    logs = _log_moduli(a)
    report = np.round(logs, 9).tolist()
    if logs[n - 2] <= GAP_TOL:
        raise GapError(f"linear part has no positive modulus gap: {report}",
                       indices=(n - 1, n))
    if abs(logs[n - 1]) > 1e-8:
        raise ArithmeticError(f"middle modulus is not 1: {report}")
    hi = float(logs[n - 2] + logs[n - 1]) / 2.0
    lo = float(logs[n - 1] + logs[n]) / 2.0
    space = geo.odd_space(n, geo.TAG_F, nm.FLOAT)
    vp = geo.Subspace(space, _schur_select(a, hi, math.inf, n - 1))
    vm = geo.Subspace(space, _schur_select(a, -math.inf, lo, n - 1))
    l0 = _schur_select(a, lo, hi, 1)[:, 0]
    v0 = _schur_select(nm.as_float(g.block()), lo, hi, 2)
    return EigenFrame("affine", vp, vm, v0=v0, l0=l0)


def eigenframe(g, context: str) -> EigenFrame:
    """Eigenspace frame of a proximal-enough element.

    Hyperbolic context takes an even-family matrix and splits off the middle
    two-plane; its null lines are labeled so the plus side extends v_plus to
    a positive isotropic n-plane (this also covers the degenerate case where
    the middle eigenvalues coincide).  Affine context takes an affine isometry
    whose linear part has a positive top gap.
    """
    if context == "hyperbolic":
        return _hyperbolic_frame(g)
    if context == "affine":
        if not isinstance(g, AffineIsometry):
            raise TypeError("affine context expects an AffineIsometry")
        return _affine_frame(g)
    raise ValueError(f"unknown context {context!r}")


# --- the neutral direction and the Margulis invariant --------------------------


def neutral_vector(frame: EigenFrame) -> np.ndarray:
    """Unit positive vector spanning l0, oriented by two independent recipes.

    Recipe one pairs bases of v_plus and v_minus so that corresponding vectors
    pair to -1, then demands a positive determinant of the combined basis
    (plus block, candidate, reversed minus block) in odd coordinates, with the
    parity factor (-1)^(n-1).  Recipe two embeds into the even space, splits
    the span of the candidate and the extra negative direction into null
    lines, and keeps the candidate whose null line extends v_plus positively.
    Disagreement means a convention bug, not bad input, hence the hard error.
    """
    if frame.context != "affine":
        raise ValueError("neutral vectors belong to affine frames")
    n = frame.n
    q = nm.as_float(frame.v_plus.ambient.form)
    l0 = frame.l0
    u0 = l0 / math.sqrt(float(l0 @ q @ l0))

    bp = nm.as_float(frame.v_plus.basis)
    bm = nm.as_float(frame.v_minus.basis)
    pairing = bp.T @ q @ bm
    fm = bm @ (-np.linalg.inv(pairing))
    det = np.linalg.det(np.column_stack([bp, u0, fm[:, ::-1]]))
    s_det = (1 if det > 0 else -1) * (-1) ** (n - 1)

    emb_plus = geo.embed_odd(frame.v_plus, "isometric")
    h_plus, _ = geo.extend_isotropic(emb_plus)
    u0_hat = geo.embed_odd(u0, "isometric")
    w0_hat = np.zeros(2 * n)
    w0_hat[n - 1], w0_hat[n] = 1.0, -1.0
    w0_hat /= math.sqrt(2.0)
    if h_plus.contains(u0_hat + w0_hat):
        s_null = 1
    elif h_plus.contains(-u0_hat + w0_hat):
        s_null = -1
    else:
        raise ArithmeticError("neither null line lies in the positive extension")
    if s_det != s_null:
        raise ArithmeticError(
            "orientation recipes disagree: determinant gives "
            f"{s_det:+d}, null-line labeling gives {s_null:+d}")
    return s_det * u0


def margulis(g: AffineIsometry) -> float:
    """Signed translation along the invariant affine line: <v, f0>.

    Independent of the evaluation point because the linear part fixes f0 and
    preserves the form.  Raises GapError when the linear part lacks the gap.
    """
    frame = eigenframe(g, "affine")
    f0 = neutral_vector(frame)
    q = nm.as_float(frame.v_plus.ambient.form)
    return float(nm.as_float(g.translation) @ q @ f0)


# --- axes and the projection onto a hyperbolic axis ----------------------------


@dataclass(frozen=True, eq=False)
class AxisData:
    """An oriented invariant line: flat (point + direction) or hyperbolic
    (null endpoint representatives normalized to pair to -1)."""

    kind: str
    orientation: np.ndarray
    base_point: Optional[np.ndarray] = None
    f_plus: Optional[np.ndarray] = None
    f_minus: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "flat":
            if self.base_point is None:
                raise ValueError("flat axis needs a base point")
            d = self.base_point.shape[0]
            q = nm.as_float(geo.odd_space((d + 1) // 2, geo.TAG_F, nm.FLOAT).form)
            if abs(float(self.orientation @ q @ self.orientation) - 1.0) > 1e-8:
                raise ValueError("orientation must be a unit positive direction")
            return
        if self.kind != "hyperbolic":
            raise ValueError(f"unknown axis kind {self.kind!r}")
        if self.f_plus is None or self.f_minus is None:
            raise ValueError("hyperbolic axis needs both null representatives")
        q = nm.as_float(geo.even_space(self.f_plus.shape[0] // 2,
                                       geo.TAG_E, nm.FLOAT).form)
        scale = max(1.0, float(np.abs(self.f_plus).max()) ** 2,
                    float(np.abs(self.f_minus).max()) ** 2)
        if abs(float(self.f_plus @ q @ self.f_plus)) > 1e-8 * scale or \
           abs(float(self.f_minus @ q @ self.f_minus)) > 1e-8 * scale:
            raise ValueError("axis endpoints must be null")
        if abs(float(self.f_plus @ q @ self.f_minus) + 1.0) > 1e-8 * scale:
            raise ValueError("endpoint representatives must pair to -1")
        if abs(float(self.orientation @ q @ self.orientation) - 1.0) > 1e-8:
            raise ValueError("orientation must be a unit positive direction")


def flat_axis(g: AffineIsometry) -> AxisData:
    """The oriented invariant affine line of g."""
    frame = eigenframe(g, "affine")
    f0 = neutral_vector(frame)
    v0 = frame.v0
    last = v0[-1, :]
    if np.abs(last).max() < 1e-12:
        raise ArithmeticError("invariant line lies at infinity")
    combo = np.linalg.lstsq(last.reshape(1, 2), np.array([1.0]), rcond=None)[0]
    point = (v0 @ combo)[:-1]
    return AxisData(kind="flat", orientation=f0, base_point=point)


def hyperbolic_axis(g) -> AxisData:
    """The oriented slow axis of an even-family element, as null endpoints."""
    frame = eigenframe(g, "hyperbolic")
    q = nm.as_float(frame.v_plus.ambient.form)
    fp = nm.as_float(frame.l_plus.basis[:, 0])
    fm = nm.as_float(frame.l_minus.basis[:, 0])
    pair = float(fp @ q @ fm)
    if abs(pair) < 1e-12:
        raise ArithmeticError("axis endpoints do not pair")
    fm = fm * (-1.0 / pair)
    # balance the representative scales; the pairing stays -1
    s = math.sqrt(np.linalg.norm(fm) / np.linalg.norm(fp))
    fp, fm = fp * s, fm / s
    orientation = (fp - fm) / math.sqrt(2.0)
    return AxisData(kind="hyperbolic", orientation=orientation,
                    f_plus=fp, f_minus=fm)


def project_axis_H(w, axis: AxisData) -> np.ndarray:
    """Nearest-point projection onto a hyperbolic axis.

    Defined for negative vectors whose pairings with both endpoints have the
    same sign; the image -<w,f+>f- - <w,f->f+ lies on the axis and the map is
    idempotent and equivariant.  The result is normalized to norm -1.
    """
    if axis.kind != "hyperbolic":
        raise ValueError("projection needs a hyperbolic axis")
    wf = nm.as_float(np.asarray(w)).reshape(-1)
    q = nm.as_float(geo.even_space(wf.shape[0] // 2, geo.TAG_E, nm.FLOAT).form)
    if float(wf @ q @ wf) >= 0:
        raise ValueError("not a point of the hyperbolic space (needs negative norm)")
    a = float(wf @ q @ axis.f_plus)
    b = float(wf @ q @ axis.f_minus)
    if a * b <= 0:
        raise ValueError("point is outside the projection domain of the axis")
    out = -a * axis.f_minus - b * axis.f_plus
    return out / math.sqrt(-float(out @ q @ out))


# --- per-element reporting ------------------------------------------------------


def element_record(word: str, length: int, g, group: lie.GroupTag,
                   affine: Optional[AffineIsometry] = None) -> dict:
    """Uniform report record for one surveyed element.

    length_H and alpha degrade to None with a "marginal" status instead of
    propagating GapError, so bulk surveys can keep going.
    """
    mu = cartan(g, group)
    lam = lyapunov(g, group)
    record = {
        "word": word,
        "length": length,
        "mu": list(mu.entries),
        "lambda": list(lam.entries),
        "middle_sign": lam.middle_sign,
        "length_H": None,
        "alpha": None,
        "status": "ok",
    }
    if group.family == lie.PSO_EVEN:
        try:
            record["length_H"] = length_H(g)
        except GapError:
            record["status"] = "marginal"
    if affine is not None:
        try:
            record["alpha"] = margulis(affine)
        except GapError:
            record["status"] = "marginal"
    return record
