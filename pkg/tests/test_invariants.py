import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sonn import geometry as geo
from sonn import invariants as inv
from sonn import lie
from sonn import numerics as nm
from sonn import reps


def rng(seed=0):
    return np.random.default_rng(seed)


def conj_diag_even(n, logs, r):
    """Random-conjugated exponentiated diagonal in the even antidiagonal group."""
    space = geo.even_space(n, geo.TAG_E, nm.FLOAT)
    h = geo.random_isometry(space, r)
    d = np.diag(np.exp(np.concatenate([logs, -np.asarray(logs)[::-1]])))
    return h @ d @ np.linalg.inv(h)


def conj_diag_odd(n, logs, r):
    """Random-conjugated exponentiated diagonal in the odd antidiagonal group."""
    space = geo.odd_space(n, geo.TAG_F, nm.FLOAT)
    h = geo.random_isometry(space, r)
    d = np.diag(np.exp(np.concatenate([logs, [0.0], -np.asarray(logs)[::-1]])))
    return h @ d @ np.linalg.inv(h)


# ---------------------------------------------------------------------------
# oracles: the expected signs and magnitudes are pinned independently here


def test_tau_oracle_for_coordinate_planes():
    # these two values calibrate every refined sign below
    sp = geo.even_space(2)
    assert geo.tau_sign(geo.coordinate_span(sp, [1, 2])) == 1
    assert geo.tau_sign(geo.coordinate_span(sp, [1, 3])) == -1


def test_golden_ratio_singular_value_identity():
    # for the unit shear, g^T g = [[1,1],[1,2]]; its top eigenvalue is the
    # square of (1+sqrt 5)/2, so log sigma_1 = log((1+sqrt 5)/2)
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    top = max(np.linalg.eigvalsh(np.array([[1.0, 1.0], [1.0, 2.0]])))
    assert top == pytest.approx(phi**2, rel=1e-14)


def test_boost_orientation_oracle():
    # eigenvectors of the rank-one boost on the diagonalized odd form
    # diag(1,1,-1): (1,0,1) expanding, (-1,0,1) contracting, (0,1,0) fixed.
    # The combined determinant and the pairing decide the neutral sign.
    f_plus = np.array([1.0, 0.0, 1.0])
    f_minus = np.array([-1.0, 0.0, 1.0])
    f_zero = np.array([0.0, 1.0, 0.0])
    q = np.diag([1.0, 1.0, -1.0])
    assert np.linalg.det(np.column_stack([f_plus, f_zero, f_minus])) == pytest.approx(2.0)
    assert f_plus @ q @ f_minus == pytest.approx(-2.0)


# ---------------------------------------------------------------------------
# Cartan and Lyapunov projections


def test_cartan_psl2_diagonal():
    g = np.diag([math.e**2, math.e**-2])
    pv = inv.cartan(g, lie.psl(2))
    assert pv.entries == pytest.approx((2.0, -2.0))
    assert pv.middle_sign is None


def test_cartan_shear_golden_ratio():
    shear = np.array([[1.0, 1.0], [0.0, 1.0]])
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    mu = inv.cartan(shear, lie.psl(2))
    assert mu.entries == pytest.approx((math.log(phi), -math.log(phi)), abs=1e-12)
    lam = inv.lyapunov(shear, lie.psl(2))
    assert lam.entries == pytest.approx((0.0, 0.0), abs=1e-12)


def test_lyapunov_refined_signs_on_diagonals():
    plus = np.diag(np.exp([3.0, 1.0, -1.0, -3.0]))
    minus = np.diag(np.exp([3.0, -1.0, 1.0, -3.0]))
    pv = inv.lyapunov(plus, lie.pso(2))
    assert pv.entries == pytest.approx((3.0, 1.0))
    assert pv.middle_sign == 1 and not pv.tie
    pv = inv.lyapunov(minus, lie.pso(2))
    assert pv.entries == pytest.approx((3.0, -1.0))
    assert pv.middle_sign == -1


def test_cartan_equals_lyapunov_on_diagonals():
    g = np.diag(np.exp([2.0, 0.5, -0.5, -2.0]))
    mu = inv.cartan(g, lie.pso(2))
    lam = inv.lyapunov(g, lie.pso(2))
    assert mu.entries == pytest.approx(lam.entries, abs=1e-12)
    assert mu.middle_sign == lam.middle_sign == 1


def test_so_odd_projection_forces_middle_zero():
    g = nm.as_float(lie.cartan_group_element(lie.so_odd(2), [nm.rational(3, 2)]))
    pv = inv.lyapunov(g, lie.so_odd(2))
    assert pv.entries == pytest.approx((math.log(1.5), 0.0, -math.log(1.5)), abs=1e-12)
    assert pv.entries[1] == 0.0


def test_middle_tie_reported_with_flag():
    g = np.diag(np.exp([2.0, 0.0, 0.0, -2.0]))
    for pv in (inv.cartan(g, lie.pso(2)), inv.lyapunov(g, lie.pso(2))):
        assert pv.entries == pytest.approx((2.0, 0.0))
        assert pv.middle_sign == 0 and pv.tie
    # the length is still defined and vanishes
    assert inv.length_H(g) == 0.0


def test_projection_rejects_non_members():
    with pytest.raises(ValueError):
        inv.cartan(np.diag([2.0, 1.0, 1.0]), lie.so_odd(2))
    with pytest.raises(ValueError):
        inv.lyapunov(np.eye(3), lie.pso(2))
    with pytest.raises(nm.SingularMatrixError):
        inv.lyapunov(np.zeros((2, 2)), lie.psl(2))


def test_projection_vector_validation():
    with pytest.raises(ValueError):
        inv.ProjectionVector(lie.psl(2), "cartan", (1.0, 2.0, -3.0))
    with pytest.raises(ValueError):
        inv.ProjectionVector(lie.psl(2), "cartan", (2.0, -1.0))
    with pytest.raises(ValueError):
        inv.ProjectionVector(lie.pso(2), "lyapunov", (1.0, 2.0), middle_sign=1)
    with pytest.raises(ValueError):
        inv.ProjectionVector(lie.pso(2), "lyapunov", (2.0, -1.0), middle_sign=1)
    with pytest.raises(ValueError):
        inv.ProjectionVector(lie.pso(2), "lyapunov", (2.0, 1.0), middle_sign=0)
    with pytest.raises(ValueError):
        inv.ProjectionVector(lie.pso(2), "bogus", (2.0, 1.0), middle_sign=1)


def test_psl_projection_ordered_and_centered():
    r = rng(3)
    for _ in range(25):
        g = r.normal(size=(3, 3))
        if abs(np.linalg.det(g)) < 1e-3:
            continue
        mu = np.array(inv.cartan(g, lie.psl(3)).entries)
        assert np.all(np.diff(mu) <= 1e-12)
        assert abs(mu.sum()) < 1e-9


def test_even_family_consistent_with_linear_view():
    r = rng(4)
    g = conj_diag_even(2, [1.7, 0.6], r)
    refined = inv.lyapunov(g, lie.pso(2))
    full = inv.lyapunov(g, lie.psl(4))
    n = 2
    for i in range(n - 1):
        assert full.entries[i] == pytest.approx(refined.entries[i], abs=1e-9)
        assert full.entries[2 * n - 1 - i] == pytest.approx(-refined.entries[i], abs=1e-9)
    assert full.entries[n - 1] == pytest.approx(-full.entries[n], abs=1e-9)
    assert abs(full.entries[n - 1]) == pytest.approx(abs(refined.entries[n - 1]), abs=1e-9)


@settings(deadline=None, max_examples=40)
@given(st.floats(0.6, 2.0), st.floats(0.05, 0.45), st.integers(1, 5),
       st.sampled_from([1, -1]))
def test_lyapunov_scales_under_powers(l1, l2, k, sign):
    g = np.diag(np.exp([l1, sign * l2, -sign * l2, -l1]))
    base = inv.lyapunov(g, lie.pso(2))
    power = inv.lyapunov(np.linalg.matrix_power(g, k), lie.pso(2))
    assert power.entries == pytest.approx(tuple(k * e for e in base.entries), rel=1e-9)
    assert power.middle_sign == base.middle_sign == sign


def test_cartan_approaches_lyapunov_monotonically():
    r = rng(2026)
    checked = 0
    while checked < 100:
        logs = np.sort(r.uniform(0.3, 2.0, size=3))[::-1]
        logs -= logs.mean()
        h = r.normal(size=(3, 3))
        if abs(np.linalg.det(h)) < 0.1:
            continue
        g = h @ np.diag(np.exp(logs)) @ np.linalg.inv(h)
        lam = np.array(inv.lyapunov(g, lie.psl(3)).entries)
        errs = []
        gk = np.eye(3)
        for k in range(1, 6):
            gk = gk @ g
            mu = np.array(inv.cartan(gk, lie.psl(3)).entries)
            errs.append(np.abs(mu / k - lam).max())
        assert all(errs[i + 1] <= errs[i] + 1e-12 for i in range(4))
        checked += 1


# ---------------------------------------------------------------------------
# the signed length function


def test_length_signed_values_on_diagonals():
    assert inv.length_H(np.diag(np.exp([3.0, 1.0, -1.0, -3.0]))) == pytest.approx(2.0)
    assert inv.length_H(np.diag(np.exp([3.0, -1.0, 1.0, -3.0]))) == pytest.approx(-2.0)


def test_length_inverse_parity():
    r = rng(5)
    g2 = conj_diag_even(2, [2.2, 0.8], r)
    assert inv.length_H(np.linalg.inv(g2)) == pytest.approx(inv.length_H(g2), abs=1e-9)
    g3 = conj_diag_even(3, [2.5, 1.4, 0.5], r)
    assert inv.length_H(np.linalg.inv(g3)) == pytest.approx(-inv.length_H(g3), abs=1e-9)
    g3m = conj_diag_even(3, [2.5, 1.4, -0.5], r)
    assert inv.length_H(np.linalg.inv(g3m)) == pytest.approx(-inv.length_H(g3m), abs=1e-9)


def test_length_conjugation_invariant():
    r = rng(6)
    space = geo.even_space(2, geo.TAG_E, nm.FLOAT)
    g = conj_diag_even(2, [1.9, 0.7], r)
    base = inv.length_H(g)
    for _ in range(200):
        h = geo.random_isometry(space, r)
        assert inv.length_H(h @ g @ np.linalg.inv(h)) == pytest.approx(base, abs=1e-9)


def test_length_gap_error_names_entries():
    g = np.diag(np.exp([1.0 + 3e-7, 1.0 - 3e-7, -1.0 + 3e-7, -1.0 - 3e-7]))
    with pytest.raises(inv.GapError) as err:
        inv.length_H(g)
    assert err.value.indices == (1, 2)
    assert "1" in str(err.value) and "2" in str(err.value)


def test_length_requires_even_square():
    with pytest.raises(ValueError):
        inv.length_H(np.eye(3))


def test_length_matches_sl2_trace_lengths():
    """Joined rank-one pairs: the signed length is the difference of the two
    hyperbolic translation lengths 2 arccosh(|tr|/2), with one global sign."""
    j1 = reps.fuchsian_genus2()
    j2 = reps.dehn_twisted(j1)
    rho = reps.pso22_from_pair(j1, j2)
    words = [
        reps.Word(((0, 1),)),
        reps.Word(((1, 1),)),
        reps.Word(((1, -1),)),
        reps.Word(((0, 1), (1, 1))),
        reps.Word(((1, 1), (2, -1))),
        reps.Word(((0, 1), (1, 1), (2, 1))),
        reps.Word(((3, 1), (1, 1), (0, -1))),
    ]
    global_sign = None
    for w in words:
        ell = []
        for j in (j1, j2):
            t = abs(float(np.trace(nm.as_float(reps.eval_word(j, w)))))
            ell.append(2.0 * math.acosh(max(t / 2.0, 1.0)))
        diff = ell[0] - ell[1]
        length = inv.length_H(nm.as_float(reps.eval_word(rho, w)))
        assert abs(length) == pytest.approx(abs(diff), abs=1e-8)
        if abs(diff) > 1e-6:
            sign = 1 if length * diff > 0 else -1
            if global_sign is None:
                global_sign = sign
            assert sign == global_sign


# ---------------------------------------------------------------------------
# eigenspace frames


def test_eigenframe_diagonal_is_coordinate_frame():
    sp = geo.even_space(3, geo.TAG_E, nm.FLOAT)
    g = np.diag(np.exp([3.0, 2.0, 1.0, -1.0, -2.0, -3.0]))
    fr = inv.eigenframe(g, "hyperbolic")
    assert fr.v_plus == geo.coordinate_span(sp, [1, 2])
    assert fr.v_minus == geo.coordinate_span(sp, [5, 6])
    assert fr.l_plus == geo.coordinate_span(sp, [3])
    assert fr.l_minus == geo.coordinate_span(sp, [4])


def test_eigenframe_plus_line_is_fixed_by_the_pairing():
    # the plus label depends only on the orientation pairing with v_plus,
    # so both middle signs share the same labeled lines; the sign lives in
    # the eigenvalue carried by the plus line, not in the line itself
    sp = geo.even_space(2, geo.TAG_E, nm.FLOAT)
    for middle in (1.0, -1.0):
        fr = inv.eigenframe(np.diag(np.exp([3.0, middle, -middle, -3.0])), "hyperbolic")
        assert fr.l_plus == geo.coordinate_span(sp, [2])
        assert fr.l_minus == geo.coordinate_span(sp, [3])


def test_eigenframe_degenerate_middle_still_splits():
    sp = geo.even_space(2, geo.TAG_E, nm.FLOAT)
    g = np.diag(np.exp([2.0, 0.0, 0.0, -2.0]))
    fr = inv.eigenframe(g, "hyperbolic")
    assert fr.l_plus == geo.coordinate_span(sp, [2])
    assert fr.l_minus == geo.coordinate_span(sp, [3])
    assert geo.tau_sign(geo.span_sum(fr.v_plus, fr.l_plus)) == 1


def test_eigenframe_positive_labeling_random():
    # the plus label always extends the attracting space to a positive plane
    r = rng(7)
    for _ in range(400):
        l2 = r.uniform(0.1, 1.2) * r.choice([1.0, -1.0])
        g = conj_diag_even(2, [r.uniform(1.6, 2.8), l2], r)
        fr = inv.eigenframe(g, "hyperbolic")
        assert geo.tau_sign(geo.span_sum(fr.v_plus, fr.l_plus)) == 1
        assert fr.v_plus.is_isotropic() and fr.v_minus.is_isotropic()
    for _ in range(100):
        logs = [r.uniform(2.4, 3.0), r.uniform(1.2, 1.8),
                r.uniform(0.1, 0.6) * r.choice([1.0, -1.0])]
        fr = inv.eigenframe(conj_diag_even(3, logs, r), "hyperbolic")
        assert geo.tau_sign(geo.span_sum(fr.v_plus, fr.l_plus)) == 1


def test_eigenframe_middle_line_carries_signed_rate():
    # second route to the refined entry: the log modulus on the plus line
    r = rng(8)
    for n, logs in ((2, [2.0, 0.9]), (2, [2.0, -0.9]), (3, [2.6, 1.5, -0.4])):
        g = conj_diag_even(n, logs, r)
        pv = inv.lyapunov(g, lie.pso(n))
        fr = inv.eigenframe(g, "hyperbolic")
        fp = nm.as_float(fr.l_plus.basis[:, 0])
        image = g @ fp
        kappa = float(image[np.argmax(np.abs(fp))] / fp[np.argmax(np.abs(fp))])
        assert math.log(abs(kappa)) == pytest.approx(pv.entries[n - 1], abs=1e-8)


def test_eigenframe_gap_error_reports_moduli():
    g = np.diag(np.exp([1.0 + 4e-9, 1.0 - 4e-9, -1.0 + 4e-9, -1.0 - 4e-9]))
    with pytest.raises(inv.GapError) as err:
        inv.eigenframe(g, "hyperbolic")
    assert "modulus" in str(err.value)


def test_eigenframe_affine_dimensions():
    r = rng(9)
    a = conj_diag_odd(3, [2.0, 1.0], r)
    g = reps.AffineIsometry(a, r.normal(size=5))
    fr = inv.eigenframe(g, "affine")
    assert fr.v_plus.dim == fr.v_minus.dim == 2
    assert fr.v0.shape == (6, 2)
    assert fr.l0.shape == (5,)
    q = nm.as_float(geo.odd_space(3, geo.TAG_F, nm.FLOAT).form)
    assert float(fr.l0 @ q @ fr.l0) > 0


def test_eigenframe_context_errors():
    with pytest.raises(ValueError):
        inv.eigenframe(np.eye(4), "bogus")
    with pytest.raises(TypeError):
        inv.eigenframe(np.eye(5), "affine")
    ident = reps.AffineIsometry(np.eye(5), np.zeros(5))
    with pytest.raises(inv.GapError):
        inv.eigenframe(ident, "affine")


# ---------------------------------------------------------------------------
# the neutral direction


def diagonalized_boost(t):
    b = np.eye(3)
    b[0, 0] = b[2, 2] = math.cosh(t)
    b[0, 2] = b[2, 0] = math.sinh(t)
    return b


def test_neutral_vector_boost_calibration():
    # the boost fixing the middle diagonalized direction orients it positively
    a = geo.change_basis_matrix(diagonalized_boost(1.0), geo.TAG_EPRIME, geo.TAG_F)
    g = reps.AffineIsometry(a, np.zeros(3))
    f0 = inv.neutral_vector(inv.eigenframe(g, "affine"))
    back = geo.change_basis(f0, geo.TAG_F, geo.TAG_EPRIME)
    assert back == pytest.approx(np.array([0.0, 1.0, 0.0]), abs=1e-12)


def test_neutral_vector_unit_norm_and_inverse_parity():
    r = rng(10)
    for n, factor in ((2, -1.0), (3, 1.0)):
        logs = list(r.uniform(0.8, 2.0, size=n - 1))
        a = conj_diag_odd(n, sorted(logs, reverse=True), r)
        g = reps.AffineIsometry(a, r.normal(size=2 * n - 1))
        f0 = inv.neutral_vector(inv.eigenframe(g, "affine"))
        q = nm.as_float(geo.odd_space(n, geo.TAG_F, nm.FLOAT).form)
        assert float(f0 @ q @ f0) == pytest.approx(1.0, abs=1e-10)
        f0_inv = inv.neutral_vector(inv.eigenframe(g.inverse(), "affine"))
        # reversing the dynamics multiplies the direction by (-1)^(n+1),
        # which is what makes the invariant below flip by (-1)^n
        assert f0_inv == pytest.approx(factor * f0, abs=1e-9)


def test_neutral_vector_rejects_hyperbolic_frames():
    fr = inv.eigenframe(np.diag(np.exp([2.0, 1.0, -1.0, -2.0])), "hyperbolic")
    with pytest.raises(ValueError):
        inv.neutral_vector(fr)


# ---------------------------------------------------------------------------
# the Margulis invariant


def translated_boost(beta):
    a = geo.change_basis_matrix(diagonalized_boost(1.0), geo.TAG_EPRIME, geo.TAG_F)
    v = geo.change_basis(np.array([0.0, beta, 0.0]), geo.TAG_EPRIME, geo.TAG_F)
    return reps.AffineIsometry(a, v)


def test_margulis_translated_boost():
    assert inv.margulis(translated_boost(0.7)) == pytest.approx(0.7, abs=1e-12)
    assert inv.margulis(translated_boost(-1.3)) == pytest.approx(-1.3, abs=1e-12)


def test_margulis_basepoint_independent():
    r = rng(11)
    a = conj_diag_odd(2, [1.5], r)
    g = reps.AffineIsometry(a, r.normal(size=3))
    alpha = inv.margulis(g)
    f0 = inv.neutral_vector(inv.eigenframe(g, "affine"))
    q = nm.as_float(geo.odd_space(2, geo.TAG_F, nm.FLOAT).form)
    for _ in range(100):
        x = r.normal(size=3, scale=5.0)
        assert float((g.apply(x) - x) @ q @ f0) == pytest.approx(alpha, abs=1e-9)


def test_margulis_inverse_parity():
    r = rng(12)
    for n, factor in ((2, 1.0), (3, -1.0)):
        logs = sorted(r.uniform(0.8, 2.2, size=n - 1), reverse=True)
        g = reps.AffineIsometry(conj_diag_odd(n, logs, r), r.normal(size=2 * n - 1))
        assert inv.margulis(g.inverse()) == pytest.approx(factor * inv.margulis(g), abs=1e-9)


def test_margulis_conjugation_invariant():
    r = rng(13)
    space = geo.odd_space(2, geo.TAG_F, nm.FLOAT)
    g = reps.AffineIsometry(conj_diag_odd(2, [1.8], r), r.normal(size=3))
    alpha = inv.margulis(g)
    for _ in range(50):
        h = reps.AffineIsometry(geo.random_isometry(space, r), r.normal(size=3))
        assert inv.margulis(h.compose(g).compose(h.inverse())) == pytest.approx(alpha, abs=1e-9)


def test_margulis_vanishes_exactly_for_fixed_points():
    r = rng(14)
    a = conj_diag_odd(2, [1.4], r)
    w = r.normal(size=3)
    fixed = reps.AffineIsometry(a, (a - np.eye(3)) @ w)
    assert inv.margulis(fixed) == pytest.approx(0.0, abs=1e-10)
    # shifting along the neutral direction adds exactly that amount
    f0 = inv.neutral_vector(inv.eigenframe(fixed, "affine"))
    moved = reps.AffineIsometry(a, (a - np.eye(3)) @ w + 0.8 * f0)
    assert inv.margulis(moved) == pytest.approx(0.8, abs=1e-10)
    x = np.linalg.lstsq(a - np.eye(3), -moved.translation, rcond=None)[0]
    leftover = np.linalg.norm((a - np.eye(3)) @ x + moved.translation)
    assert leftover > 0.1  # no fixed point remains


# ---------------------------------------------------------------------------
# axes and projection


def test_flat_axis_runs_along_neutral_direction():
    g = translated_boost(0.9)
    ax = inv.flat_axis(g)
    assert ax.kind == "flat"
    moved = g.apply(ax.base_point) - ax.base_point
    assert moved == pytest.approx(0.9 * ax.orientation, abs=1e-9)


def test_flat_axis_of_conjugated_elements():
    r = rng(15)
    g = reps.AffineIsometry(conj_diag_odd(3, [2.1, 1.0], r), r.normal(size=5))
    ax = inv.flat_axis(g)
    moved = g.apply(ax.base_point) - ax.base_point
    # the base point moves along the axis by exactly the invariant
    assert moved == pytest.approx(inv.margulis(g) * ax.orientation, abs=1e-8)


def test_hyperbolic_axis_normalization():
    r = rng(16)
    g = conj_diag_even(2, [2.0, 0.8], r)
    ax = inv.hyperbolic_axis(g)
    q = nm.as_float(geo.even_space(2, geo.TAG_E, nm.FLOAT).form)
    assert float(ax.f_plus @ q @ ax.f_minus) == pytest.approx(-1.0, abs=1e-10)
    assert abs(float(ax.f_plus @ q @ ax.f_plus)) < 1e-10
    assert float(ax.orientation @ q @ ax.orientation) == pytest.approx(1.0, abs=1e-10)


def test_projection_idempotent():
    r = rng(17)
    g = conj_diag_even(2, [2.0, 0.8], r)
    ax = inv.hyperbolic_axis(g)
    q = nm.as_float(geo.even_space(2, geo.TAG_E, nm.FLOAT).form)
    hits = 0
    while hits < 30:
        w = r.normal(size=4)
        if float(w @ q @ w) >= -0.1:
            continue
        a, b = float(w @ q @ ax.f_plus), float(w @ q @ ax.f_minus)
        if a * b <= 0:
            continue
        p = inv.project_axis_H(w, ax)
        assert float(p @ q @ p) == pytest.approx(-1.0, abs=1e-10)
        p2 = inv.project_axis_H(p, ax)
        assert p2 == pytest.approx(p, abs=1e-10)
        hits += 1


def test_projection_midpoint_example():
    # a point pairing equally with both endpoints projects to their midpoint
    g = np.diag(np.exp([3.0, 1.0, -1.0, -3.0]))
    ax = inv.hyperbolic_axis(g)
    e = np.eye(4)
    w = e[:, 1] - e[:, 2] + 0.3 * (e[:, 0] - e[:, 3])
    p = inv.project_axis_H(w, ax)
    direction = (e[:, 1] - e[:, 2]) / math.sqrt(2.0)
    assert p == pytest.approx(direction, abs=1e-12) or \
        p == pytest.approx(-direction, abs=1e-12)


def test_projection_domain_errors():
    g = np.diag(np.exp([3.0, 1.0, -1.0, -3.0]))
    ax = inv.hyperbolic_axis(g)
    e = np.eye(4)
    with pytest.raises(ValueError):
        inv.project_axis_H(e[:, 0] + e[:, 3], ax)  # positive norm
    with pytest.raises(ValueError):
        inv.project_axis_H(e[:, 0] - e[:, 3], ax)  # negative norm, zero pairing


def test_projection_equivariance():
    r = rng(18)
    space = geo.even_space(2, geo.TAG_E, nm.FLOAT)
    q = nm.as_float(space.form)
    g = conj_diag_even(2, [2.0, 0.9], r)
    ax = inv.hyperbolic_axis(g)
    done = 0
    while done < 200:
        k = geo.random_isometry(space, r)
        ax_k = inv.hyperbolic_axis(k @ g @ np.linalg.inv(k))
        w = r.normal(size=4)
        if float(w @ q @ w) >= -0.1:
            continue
        a, b = float(w @ q @ ax.f_plus), float(w @ q @ ax.f_minus)
        if a * b <= 1e-3:
            continue
        lhs = inv.project_axis_H(k @ w, ax_k)
        rhs = k @ inv.project_axis_H(w, ax)
        rhs = rhs / math.sqrt(-float(rhs @ q @ rhs))
        agree = np.allclose(lhs, rhs, atol=1e-10) or np.allclose(lhs, -rhs, atol=1e-10)
        assert agree
        done += 1


def test_projection_requires_hyperbolic_axis():
    ax = inv.flat_axis(translated_boost(0.5))
    with pytest.raises(ValueError):
        inv.project_axis_H(np.zeros(3), ax)


def test_axis_data_validation():
    e = np.eye(4)
    with pytest.raises(ValueError):
        inv.AxisData(kind="flat", orientation=np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        inv.AxisData(kind="hyperbolic", orientation=e[:, 0],
                     f_plus=e[:, 1], f_minus=e[:, 2])  # pairing is +1


# ---------------------------------------------------------------------------
# per-element records


def test_element_record_schema():
    g = np.diag(np.exp([3.0, 1.0, -1.0, -3.0]))
    rec = inv.element_record("a", 1, g, lie.pso(2))
    assert set(rec) == {"word", "length", "mu", "lambda", "middle_sign",
                        "length_H", "alpha", "status"}
    assert rec["word"] == "a" and rec["length"] == 1
    assert rec["lambda"] == pytest.approx([3.0, 1.0])
    assert rec["middle_sign"] == 1
    assert rec["length_H"] == pytest.approx(2.0)
    assert rec["alpha"] is None and rec["status"] == "ok"


def test_element_record_marginal_status():
    g = np.diag(np.exp([1.0 + 1e-8, 1.0 - 1e-8, -1.0 + 1e-8, -1.0 - 1e-8]))
    rec = inv.element_record("b", 1, g, lie.pso(2))
    assert rec["status"] == "marginal" and rec["length_H"] is None

    ident = reps.AffineIsometry(np.eye(3), np.ones(3))
    rec = inv.element_record("c", 2, np.eye(3), lie.so_odd(2), affine=ident)
    assert rec["status"] == "marginal" and rec["alpha"] is None


def test_element_record_affine_alpha():
    g = translated_boost(0.6)
    rec = inv.element_record("d", 1, nm.as_float(g.linear), lie.so_odd(2), affine=g)
    assert rec["alpha"] == pytest.approx(0.6)
    assert rec["length_H"] is None and rec["status"] == "ok"
