from fractions import Fraction

import numpy as np
import pytest

from sonn import lie
from sonn import numerics as nm

ALL_GROUPS = (
    [lie.psl(d) for d in range(2, 10)]
    + [lie.pso(n) for n in range(2, 6)]
    + [lie.so_odd(n) for n in range(2, 6)]
)


def diag_entries(m):
    return [m[k, k] for k in range(m.shape[0])]


# ---------------------------------------------------------------------------
# coroots


def test_coroot_psl_pattern():
    h = lie.coroot(lie.psl(4), 2, Fraction(3))
    assert diag_entries(h) == [0, 3, -3, 0]


def test_coroot_pso_long_pattern():
    h = lie.coroot(lie.pso(3), 1, 1)
    assert diag_entries(h) == [1, -1, 0, 0, 1, -1]


def test_coroot_pso_last_pattern():
    # t(delta_{n-1} + delta_n - delta_{n+1} - delta_{n+2})
    h = lie.coroot(lie.pso(3), 3, Fraction(2))
    assert diag_entries(h) == [0, 2, 2, -2, -2, 0]


def test_coroot_odd_long_pattern():
    h = lie.coroot(lie.so_odd(3), 1, 1)
    assert diag_entries(h) == [1, -1, 0, 1, -1]


def test_coroot_odd_short_pattern():
    # doubled so that the defining pairing alpha(H) = 2 holds
    h = lie.coroot(lie.so_odd(3), 2, 1)
    assert diag_entries(h) == [0, 2, 0, -2, 0]


def test_coroot_zero_parameter():
    for g in (lie.psl(3), lie.pso(2), lie.so_odd(2)):
        h = lie.coroot(g, 1, 0)
        assert all(v == 0 for v in h.ravel())


def test_coroot_index_out_of_range():
    with pytest.raises(IndexError):
        lie.coroot(lie.pso(3), 4)


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_coroot_pairing_is_two(group):
    for i in range(1, group.rank + 1):
        assert lie.simple_root_value(group, i, lie.coroot(group, i)) == 2


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_coroot_in_algebra(group):
    for i in range(1, group.rank + 1):
        assert lie.in_algebra(group, lie.coroot(group, i))


# ---------------------------------------------------------------------------
# Cartan matrices against the classical types


def expected_type_a(r):
    m = 2 * np.eye(r, dtype=int) - np.eye(r, k=1, dtype=int) - np.eye(r, k=-1, dtype=int)
    return m


def test_cartan_matrix_psl_is_type_a():
    for d in range(2, 10):
        got = nm.as_float(lie.cartan_matrix(lie.psl(d)))
        assert np.array_equal(got, expected_type_a(d - 1))


def test_cartan_matrix_pso_is_type_d():
    for n in range(3, 6):
        m = expected_type_a(n)
        # node n attaches to n-2 instead of n-1
        m[n - 1, n - 2] = m[n - 2, n - 1] = 0
        m[n - 1, n - 3] = m[n - 3, n - 1] = -1
        got = nm.as_float(lie.cartan_matrix(lie.pso(n)))
        assert np.array_equal(got, m)


def test_cartan_matrix_pso2_is_a1_times_a1():
    got = nm.as_float(lie.cartan_matrix(lie.pso(2)))
    assert np.array_equal(got, 2 * np.eye(2))


def test_cartan_matrix_odd_is_type_b():
    for n in range(3, 6):
        m = expected_type_a(n - 1)
        m[n - 3, n - 2] = -2  # long root paired against the short coroot
        got = nm.as_float(lie.cartan_matrix(lie.so_odd(n)))
        assert np.array_equal(got, m)


# ---------------------------------------------------------------------------
# pinning generators


def test_pinning_pso_long_pattern():
    n = 3
    x = lie.pinning_X(lie.pso(n), 1, 1, Fraction(5))
    expect = nm.zeros((6, 6), nm.EXACT)
    expect[0, 1] = Fraction(5)
    expect[4, 5] = Fraction(-5)
    assert np.array_equal(x, expect)


def test_pinning_pso_last_pattern():
    n = 3
    x = lie.pinning_X(lie.pso(n), n, 1, 1)
    expect = nm.zeros((6, 6), nm.EXACT)
    expect[n - 2, n] = Fraction(1)
    expect[n - 1, n + 1] = Fraction(-1)
    assert np.array_equal(x, expect)


def test_pinning_lower_is_transpose_pattern():
    n = 3
    up = lie.pinning_X(lie.pso(n), n, 1, 1)
    dn = lie.pinning_X(lie.pso(n), n, -1, 1)
    assert np.array_equal(dn, up.T)


def test_pinning_x_at_zero_is_identity():
    for group in (lie.psl(3), lie.pso(3), lie.so_odd(3)):
        for i in range(1, group.rank + 1):
            assert np.array_equal(lie.pinning_x(group, i, 1, 0), nm.identity(group.dim, nm.EXACT))


@pytest.mark.parametrize("group", [lie.psl(4), lie.pso(3), lie.so_odd(3)])
def test_pinning_one_parameter_subgroup(group):
    s, t = Fraction(2, 3), Fraction(-5, 7)
    for i in range(1, group.rank + 1):
        for sign in (1, -1):
            a = lie.pinning_x(group, i, sign, s)
            b = lie.pinning_x(group, i, sign, t)
            ab = nm.matmul(a, b)
            assert np.array_equal(ab, lie.pinning_x(group, i, sign, s + t))


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_pinning_in_algebra_and_group(group):
    for i in range(1, group.rank + 1):
        for sign in (1, -1):
            assert lie.in_algebra(group, lie.pinning_X(group, i, sign, Fraction(3, 2)))
            assert lie.in_group(group, lie.pinning_x(group, i, sign, Fraction(3, 2)))


def test_pinning_square_zero_except_odd_short_root():
    for group in (lie.psl(5), lie.pso(4)):
        for i in range(1, group.rank + 1):
            x = lie.pinning_X(group, i, 1)
            assert all(v == 0 for v in nm.matmul(x, x).ravel())
    group = lie.so_odd(4)
    for i in range(1, group.rank):
        x = lie.pinning_X(group, i, 1)
        assert all(v == 0 for v in nm.matmul(x, x).ravel())
    # the short root squares to a rank-one matrix and cubes to zero
    x = lie.pinning_X(group, group.rank, 1, Fraction(3))
    sq = nm.matmul(x, x)
    assert any(v != 0 for v in sq.ravel())
    assert all(v == 0 for v in nm.matmul(sq, x).ravel())


def test_pinning_x_matches_float_expm():
    for group in (lie.psl(4), lie.pso(3), lie.so_odd(3)):
        for i in range(1, group.rank + 1):
            x = lie.pinning_X(group, i, 1, Fraction(7, 10))
            got = nm.as_float(lie.pinning_x(group, i, 1, Fraction(7, 10)))
            assert np.allclose(got, nm.matrix_exp(x), atol=1e-12)


# ---------------------------------------------------------------------------
# sl2-triples


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_tds_all_indices(group):
    for i in range(1, group.rank + 1):
        assert lie.check_tds(group, i)


def test_tds_detects_breakage():
    group = lie.pso(3)
    h = lie.coroot(group, 1)
    xp = lie.pinning_X(group, 1, 1)
    xp = xp.copy()
    xp[0, 0] += Fraction(1)
    assert not np.array_equal(lie.bracket(h, xp), 2 * xp)


def test_bracket_requires_exact():
    with pytest.raises(nm.BackendError):
        lie.bracket(np.eye(2), np.eye(2))


# ---------------------------------------------------------------------------
# conjugation by Cartan elements


def test_scale_conjugation_simple_example():
    group = lie.pso(3)
    a = lie.cartan_group_element(group, [2, 1, 1])
    assert lie.multiplicative_root_value(group, 1, a) == 2
    assert lie.scale_conjugate_identity(group, 1, a, Fraction(1, 3))


def test_scale_conjugation_identity_element():
    group = lie.pso(3)
    a = lie.cartan_group_element(group, [1, 1, 1])
    for i in range(1, group.rank + 1):
        assert lie.multiplicative_root_value(group, i, a) == 1
        assert lie.scale_conjugate_identity(group, i, a, 5)


def test_scale_conjugation_last_root_product_rule():
    group = lie.pso(4)
    a = lie.cartan_group_element(group, [5, 4, 3, 2])
    assert lie.multiplicative_root_value(group, 4, a) == 6  # a_{n-1} * a_n
    for i in range(1, 5):
        assert lie.scale_conjugate_identity(group, i, a, Fraction(2, 7))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_scaling_path_rescales_uniformly(n):
    group = lie.pso(n)
    s = Fraction(3, 2)
    a = lie.scaling_path_element(n, s)
    assert lie.in_group(group, a)
    for i in range(1, n + 1):
        assert lie.multiplicative_root_value(group, i, a) == s
        assert lie.scale_conjugate_identity(group, i, a, Fraction(1, 4))


def test_scale_conjugation_odd_family():
    group = lie.so_odd(3)
    a = lie.cartan_group_element(group, [3, 2])
    assert lie.multiplicative_root_value(group, 2, a) == 2
    for i in (1, 2):
        assert lie.scale_conjugate_identity(group, i, a, Fraction(1, 2))


# ---------------------------------------------------------------------------
# chamber predicate


def test_positive_chamber_psl():
    datum = lie.RootDatum(lie.psl(4))
    assert datum.in_positive_chamber([3, 2, 2, 0])
    assert not datum.in_positive_chamber([1, 2, 0, 0])


def test_positive_chamber_pso_allows_negative_last():
    datum = lie.RootDatum(lie.pso(3))
    assert datum.in_positive_chamber([3, 2, -1])
    assert not datum.in_positive_chamber([3, 2, -5])


def test_positive_chamber_odd():
    datum = lie.RootDatum(lie.so_odd(3))
    assert datum.in_positive_chamber([2, 1])
    assert not datum.in_positive_chamber([2, -1])
