import math
import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from sharpflat.padic import RingDescriptor
from sharpflat.series import (GroupRingElement, Mat2, Series, eval_at, eval_character,
                              project_pi, reduce_to_level)
from sharpflat.logmatrix import growth_profile, log_matrix, log_matrix_at_root, log_tail_bound
from sharpflat.decompose import (LPair, NotRankOne, RankOne, compose1, compose2, decompose1,
                                 decompose2, decompose_finite, decompose_input_prec, embed,
                                 random_four, random_pair, random_theta_tower, rank1_factor,
                                 restrict_diag, stabilize, swap_xy, three_term_defect,
                                 tower_from_pair)
from sharpflat.errors import NotDecomposable, PrecisionExhausted, SingularAtLevel

N, M = 12, 81
R = RingDescriptor(3, 3, N)
NIN = decompose_input_prec(3, N, M)


def zero_one():
    one = Series.one(R, (M,))
    return one, one * 0


def test_input_precision_is_int():
    assert isinstance(NIN, int) and NIN > N


def test_compose_trivial_pairs():
    one, zero = zero_one()
    L = log_matrix(R, NIN, M).matrix
    la, lb = compose1(LPair(one, zero), NIN, M)
    assert (la - L.a).with_prec(NIN).is_zero() and (lb - L.b).with_prec(NIN).is_zero()
    la, lb = compose1(LPair(zero, zero), N, M)
    assert la.is_zero() and lb.is_zero()


def test_decompose_first_row():
    one, zero = zero_one()
    L = log_matrix(R, NIN, M).matrix
    got = decompose1(L.a, L.b, N, M)
    assert got.sharp == one and got.flat == zero


@pytest.mark.parametrize("ap", [3, -3])
def test_round_trip(ap):
    ring = R.with_(ap=ap)
    for seed in range(8):
        P = random_pair(ring, M, seed, N)
        la, lb = compose1(P, NIN, M)
        Q = decompose1(la, lb, N, M)
        assert Q == P
        assert min(Q.sharp.vfloor(), Q.flat.vfloor()) >= 0
        assert Q.certificate["tolerance"] == 0


def test_random_pair_is_seeded():
    assert random_pair(R, 9, 3, N) == random_pair(R, 9, 3, N)
    assert not random_pair(R, 9, 3, N) == random_pair(R, 9, 4, N)


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6))
def test_round_trip_property(seed):
    n, m = 8, 27
    ring = R.with_(N=n)
    P = random_pair(ring, m, seed, n)
    la, lb = compose1(P, decompose_input_prec(3, n, m), m)
    assert decompose1(la, lb, n, m) == P


def test_values_at_roots_match_finite_product():
    P = random_pair(R, M, 11, N)
    la, lb = compose1(P, N, M)
    for n in (1, 2):
        x = R.with_(n=n).zeta() - 1
        A = log_matrix_at_root(R, n)
        sx, fx = (eval_at(s, x, math.inf) for s in P)
        want = (sx * A.a + fx * A.c, sx * A.b + fx * A.d)
        tail = math.floor(log_tail_bound(3, M, x.valuation()))
        for got, w in zip((la, lb), want):
            g = eval_at(got, x, math.inf)
            assert (g - w).with_prec(min(N, tail)).is_zero()


@pytest.mark.parametrize("deg", [0, 7, 50])
def test_corruption_rejected(deg):
    P = random_pair(R, M, 1, N)
    la, lb = compose1(P, NIN, M)
    bad = la.data.copy()
    bad[deg][0] += 1
    with pytest.raises(NotDecomposable):
        decompose1(Series(la.ring, la.caps, bad, la.shift, la.prec), lb, N, M)


def test_insufficient_precision():
    P = random_pair(R, M, 1, N)
    la, lb = compose1(P, N, M)
    with pytest.raises(PrecisionExhausted):
        decompose1(la, lb, N, M)


def test_composed_growth():
    P = random_pair(R, M, 2, N)
    for s in compose1(P, NIN, M):
        assert growth_profile(s).order <= 0.6


CAPS = (27, 27)
N2 = 10


@pytest.fixture(scope="module")
def two_var():
    ring = R.with_(N=N2)
    nin = decompose_input_prec(3, N2, 27, 2)
    src = random_four(ring, CAPS, 3, N2)
    return ring, nin, src, compose2(src, nin, CAPS)


def test_decompose2_round_trip(two_var):
    ring, nin, src, four = two_var
    out = decompose2(four, N2, CAPS)
    assert all(a == b for a, b in zip(out.entries(), src.entries()))
    assert all(e.vfloor() >= 0 for e in out.entries())


def test_decompose2_identity(two_var):
    ring, nin, _, _ = two_var
    one = Series.one(ring, CAPS)
    ident = Mat2(one, one * 0, one * 0, one)
    out = decompose2(compose2(ident, nin, CAPS), N2, CAPS)
    assert all(a == b for a, b in zip(out.entries(), ident.entries()))


def test_decompose2_symmetry(two_var):
    _, _, src, four = two_var
    out = decompose2(four, N2, CAPS)
    sym = decompose2(four.transpose().map(swap_xy), N2, CAPS)
    assert all(a == swap_xy(b) for a, b in zip(sym.entries(), out.transpose().entries()))


def test_decompose2_corruption(two_var):
    _, _, _, four = two_var
    bad = four.a.data.copy()
    bad[3, 2][0] += 1
    broken = Mat2(Series(four.a.ring, four.a.caps, bad, four.a.shift, four.a.prec),
                  four.b, four.c, four.d)
    with pytest.raises(NotDecomposable):
        decompose2(broken, N2, CAPS)


def test_restrict_diag():
    caps = (6, 6)
    X, Y = Series.var(R, caps, 0), Series.var(R, caps, 1)
    assert restrict_diag(X - Y).is_zero()
    assert restrict_diag(X * Y) == Series.var(R, (6,)) ** 2


def test_restrict_diag_substitution():
    nin = 20
    cap = 9
    caps = (cap, cap)
    L = log_matrix(R, nin, cap).matrix
    q = L.a.ring
    c = lambda v: Series.constant(R, caps, v)
    full = compose2(Mat2(c(1), c(2), c(-1), c(5)), nin, caps)
    c1 = lambda v: Series.constant(q, (cap,), v)
    diag = L.transpose() * Mat2(c1(1), c1(2), c1(-1), c1(5)) * L
    for a, b in zip(full.entries(), diag.entries()):
        assert (restrict_diag(a) - b).with_prec(nin - 6).is_zero()


def test_embed_and_swap():
    f = Series.from_coeffs(R, [1, 2, 3], 3)
    e = embed(f, (3, 4), 1)
    assert e[0, 2] == R(3) and e[1, 0].is_zero()
    assert swap_xy(e)[2, 0] == R(3)


RT = RingDescriptor(3, 3, 10)


@pytest.fixture(scope="module")
def tower():
    return random_theta_tower(RT, 4, 5)


def test_tower_relation(tower):
    assert all(three_term_defect(tower, n).is_zero() for n in range(4))


@pytest.mark.parametrize("xi", ["alpha", "beta"])
def test_stabilize_compatible(tower, xi):
    T = stabilize(tower, xi)
    assert all(T.compatible(n) for n in range(4))


def test_stabilize_detects_perturbation(tower):
    bad = list(tower)
    d = bad[3].data.copy()
    d[2][0] += 1
    bad[3] = GroupRingElement(bad[3].ring, 3, d)
    T = stabilize(bad, "alpha")
    assert not T.compatible(2)
    assert not three_term_defect(bad, 2).is_zero()


def test_stabilize_zero():
    z = [GroupRingElement.from_coeffs(RT, n, [0] * 3 ** n) for n in range(3)]
    T = stabilize(z, "alpha")
    assert all(T.levels[n].is_zero() for n in range(3))


def test_stabilize_at_primitive_character(tower):
    T = stabilize(tower, "alpha")
    q = T.levels[0].ring
    alpha = q.alpha()
    for n in (1, 2):
        got = eval_character(T.levels[n], n)
        th = eval_character(tower[n], n).to_ring(got.ring)
        assert got * alpha.to_ring(got.ring) ** n == th


def test_decompose_finite_from_pair():
    P = random_pair(RT, 40, 3, 10)
    tw = tower_from_pair(P, 3)
    for n in (1, 2, 3):
        D = decompose_finite(tw[n], tw[n - 1], n, 10)
        assert D.certificate["rank"] == 3 ** n + 1
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for got, src in zip((D.sharp, D.flat), P):
                assert eval_character(got, 0) == eval_character(reduce_to_level(src, n), 0)
    with pytest.raises(SingularAtLevel):
        decompose_finite(tw[2], tw[1], 2, 10, strict=True)


def test_decompose_finite_zero():
    z1 = GroupRingElement.from_coeffs(RT, 1, [0, 0, 0])
    z0 = GroupRingElement.from_coeffs(RT, 0, [0])
    D = decompose_finite(z1, z0, 1, 10)
    assert D.sharp.is_zero() and D.flat.is_zero()


def test_decompose_finite_consistent_across_levels():
    P = random_pair(RT, 40, 8, 10)
    tw = tower_from_pair(P, 3)
    D2 = decompose_finite(tw[2], tw[1], 2, 10)
    D3 = decompose_finite(tw[3], tw[2], 3, 10)
    for a, b in zip((D2.sharp, D2.flat), (D3.sharp, D3.flat)):
        assert eval_character(a, 0) == eval_character(project_pi(b), 0)


R20 = RingDescriptor(3, 3, 20)


def structured(rng, cap):
    a = rng.randrange(2)
    lam = rng.randrange(3)
    D = [3 * rng.randrange(1, 9) for _ in range(lam)] + [1]
    U = [rng.randrange(1, 3)] + [rng.randrange(9) for _ in range(cap - 1)]
    return (Series.from_coeffs(R20, D, cap) * Series.from_coeffs(R20, U, cap)).mul_p_power(a)


def test_rank1_outer_products():
    rng = random.Random(4)
    cap = 30
    for _ in range(10):
        c = (structured(rng, cap), structured(rng, cap))
        r = (structured(rng, cap), structured(rng, cap))
        mat = Mat2(c[0] * r[0], c[0] * r[1], c[1] * r[0], c[1] * r[1])
        res = rank1_factor(mat)
        assert isinstance(res, RankOne)
        k = (res.cap,)
        # col is proportional to the true column
        assert (res.col[0] * c[1].truncate(k) - res.col[1] * c[0].truncate(k)).with_prec(res.prec).is_zero()
        for i in range(2):
            for j in range(2):
                assert (res.col[i] * res.row[j] - mat[i, j].truncate(k)).with_prec(res.prec).is_zero()


def test_rank1_rejections():
    X = Series.var(R20, (30,))
    one = Series.one(R20, (30,))
    z = one * 0
    res = rank1_factor(Mat2(X, z, z, one))
    assert isinstance(res, NotRankOne) and not res and res.reason == "nonvanishing minor"
    res = rank1_factor(Mat2(z, z, z, z))
    assert isinstance(res, NotRankOne) and res.reason == "zero matrix"
