import math
from fractions import Fraction

import pytest

from sharpflat.padic import RingDescriptor
from sharpflat.series import Mat2, Series, cyclotomic_poly, omega, reduce_to_level
from sharpflat.logmatrix import (c_matrix, eval_log_matrix, growth_profile, h_matrices,
                                 kernel_membership, log_matrix, log_matrix_at_root,
                                 log_series)
from sharpflat.series import GroupRingElement

N, M = 10, 27


@pytest.fixture(scope="module", params=[3, -3])
def ring(request):
    return RingDescriptor(3, request.param, N)


@pytest.fixture(scope="module")
def lm(ring):
    return log_matrix(ring, N, M)


def naive_log(ring, k, cap):
    """C_1 ... C_k A'^-(k+2) E by direct matrix products over the quadratic ring."""
    q = ring.with_(quad=True)
    p, ap = ring.p, ring.ap
    one = Series.one(q, (cap,))
    const = lambda c: one.scale(c)
    P = Mat2(one, one * 0, one * 0, one)
    for j in range(1, k + 1):
        coeffs = [sum(math.comb(i * 3 ** (j - 1), t) for i in range(3)) for t in range(cap)]
        phi = Series.from_coeffs(q, coeffs, cap)
        P = P * Mat2(const(ap), one, -phi, one * 0)
    # A'^-1 = (1/p) [[0, -1], [p, a_p]]
    ainv = Mat2(const(0), const(Fraction(-1, p)), const(1), const(Fraction(ap, p)))
    for _ in range(k + 2):
        P = P * ainv
    E = Mat2(const(-1), const(-1), const(q.beta()), const(q.alpha()))
    return P * E


def test_c_matrix(ring):
    C = c_matrix(ring, 1, 5)
    at0 = [C[i, j][0] for i in range(2) for j in range(2)]
    assert at0 == [ring(ring.ap), ring(1), ring(-3), ring(0)]
    for n in (1, 2):
        C = c_matrix(ring, n, 20)
        assert C.det() == cyclotomic_poly(ring, n, 20)


def test_c_matrix_singular_at_root(ring):
    from sharpflat.series import eval_at
    x = ring.with_(n=2).zeta() - 1
    C = c_matrix(ring, 2, 7)
    assert eval_at(C.c, x, math.inf).is_zero()


def test_log_matrix_at_zero(ring, lm):
    q = ring.with_(quad=True)
    p, ap = 3, ring.ap
    # A'^-2 E with A'^-1 = (1/p)[[0,-1],[p,a_p]]
    ai = [[q(0), q(Fraction(-1, p))], [q(1), q(Fraction(ap, p))]]
    a2 = [[sum((ai[i][k] * ai[k][j] for k in range(2)), q(0)) for j in range(2)] for i in range(2)]
    E = [[q(-1), q(-1)], [q.beta(), q.alpha()]]
    want = [[sum((a2[i][k] * E[k][j] for k in range(2)), q(0)) for j in range(2)] for i in range(2)]
    got = lm.matrix
    for i in range(2):
        for j in range(2):
            assert (got[i, j][0] - want[i][j]).with_prec(lm.prec).is_zero()


def test_log_matrix_against_naive_product(ring, lm):
    ref = naive_log(ring, lm.depth, M)
    for a, b in zip(lm.matrix.entries(), ref.entries()):
        assert (a - b).with_prec(N).is_zero()


def test_stabilization(ring):
    res = log_matrix(ring, N, 81)
    ext = res.extended(1)
    assert all((a - b).with_prec(N).is_zero() for a, b in zip(ext.entries(), res.matrix.entries()))
    assert res.certificate["depth"] == res.depth


def test_det_closed_form(ring, lm):
    q = ring.with_(quad=True)
    scal = (q.beta() - q.alpha()) * Fraction(1, 9)
    want = log_series(q, M + 1).shift_x(-1).truncate((M,)).scale(scal)
    assert (lm.matrix.det() - want).with_prec(N - 2).is_zero()


def test_first_row_projection(ring, lm):
    one = Series.one(lm.matrix.a.ring, (M,))
    zero = one * 0
    la, lb = lm.matrix.row_vec_mul(one, zero)
    assert la == lm.matrix.a and lb == lm.matrix.b


@pytest.mark.parametrize("n", [1, 2, 3])
def test_value_at_roots(ring, n):
    res = log_matrix(ring, 8, 243)
    exact = log_matrix_at_root(ring, n)
    approx = eval_log_matrix(res, ring.with_(n=n).zeta() - 1)
    for a, b in zip(exact.entries(), approx.entries()):
        assert b.prec >= 8
        assert (a - b).with_prec(b.prec).is_zero()


def test_root_values_consistent_across_levels(ring):
    # at zeta_{p^n} - 1 the factor C_{n+1} equals A', so the level-n+1 product
    # evaluated at a level-n root reproduces the level-n value
    from sharpflat.logmatrix import _assemble
    for n in (1, 2):
        R = ring.with_(n=n, quad=True)
        x = R.zeta() - 1
        vals = []
        for k in (n, n + 1):
            q = [[R(1), R(0)], [R(0), R(1)]]
            for j in range(1, k + 1):
                phi = sum(((1 + x) ** (3 ** (j - 1) * i) for i in range(3)), R(0))
                q = [[q[0][0] * ring.ap - phi * q[0][1], q[0][0]],
                     [q[1][0] * ring.ap - phi * q[1][1], q[1][0]]]
            e = k + 2
            ainv = R.beta() ** e * Fraction(1, 3 ** e)
            binv = R.alpha() ** e * Fraction(1, 3 ** e)
            vals.append([(-q[0][0] + q[0][1] * R.beta()) * ainv,
                         (-q[0][0] + q[0][1] * R.alpha()) * binv])
        assert vals[0] == vals[1]
        lr = log_matrix_at_root(ring, n)
        assert [lr.a, lr.b] == vals[0]


def test_h1(ring):
    H, Hp = h_matrices(ring, 1)
    cap = H.a.caps[0]
    assert H.a == -Series.one(ring, (cap,))
    assert H.b.is_zero() and H.c.is_zero()
    assert H.d == -cyclotomic_poly(ring, 1, cap)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_h_determinant_and_left_annihilation(ring, n):
    H, Hp = h_matrices(ring, n)
    cap = H.a.caps[0]
    X = Series.var(ring, (cap,))
    w = omega(ring, n, cap)
    assert X * H.det() == w or X * H.det() == -w
    assert all(reduce_to_level(e, n).is_zero() for e in (Hp * H).entries())
    # X adj(H) annihilates on both sides
    XA = H.adj().map(lambda e: e * X)
    assert all(reduce_to_level(e, n).is_zero() for e in (H * XA).entries())
    assert all(reduce_to_level(e, n).is_zero() for e in (XA * H).entries())


def test_kernel_membership_round_trip(ring):
    import random
    rng = random.Random(5)
    for n in (1, 2):
        size = 3 ** n
        H, _ = h_matrices(ring, n)
        Hn = H.map(lambda s: reduce_to_level(s, n))
        a = GroupRingElement.from_coeffs(ring, n, [rng.randrange(-9, 10) for _ in range(size)])
        b = GroupRingElement.from_coeffs(ring, n, [rng.randrange(-9, 10) for _ in range(size)])
        v = Hn.row_vec_mul(a, b)
        res = kernel_membership(v, n, ring, N)
        assert res.status == "InRowSpanH"
        wa, wb = res.witness
        back = Hn.row_vec_mul(wa, wb)
        assert all((x - y).with_prec(N).is_zero() for x, y in zip(back, v))
        assert res.adj_zero


def test_kernel_membership_zero_and_non_member(ring):
    z = GroupRingElement.from_coeffs(ring, 1, [0, 0, 0])
    res = kernel_membership((z, z), 1, ring, N)
    assert res.status == "InRowSpanH"
    assert all(w.is_zero() for w in res.witness)
    # (0, 1) is not a combination of the rows of -diag(1, Phi_3) at level 1
    one = GroupRingElement.one(ring, 1)
    res = kernel_membership((z, one), 1, ring, N)
    assert res.status == "NotInRowSpan"
    assert not res.adj_zero


def test_growth_calibration():
    R = RingDescriptor(3, 3, 20)
    for cap in (27, 81):
        prof = growth_profile(log_series(R, cap))
        assert abs(prof.order - 1.0) <= 0.1
    unit = Series.from_coeffs(R, [1, 2, 5, 7, 1], 27)
    assert growth_profile(unit).order == 0


def test_log_series_valuations():
    R = RingDescriptor(3, 3, 20)
    f = log_series(R, 40)
    for j in range(1, 40):
        k = 0
        while j % 3 ** (k + 1) == 0:
            k += 1
        assert f[j].valuation() == -k


def test_growth_of_log_matrix(lm):
    for e in lm.matrix.entries():
        assert growth_profile(e).order <= 0.6
