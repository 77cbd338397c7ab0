from fractions import Fraction

import pytest

from sharpflat.padic import RingDescriptor, teichmuller
from sharpflat.series import Series
from sharpflat.honda import (DEFAULT_CONVENTION, f_poly, formal_group, formal_group_axioms,
                             honda_log, lambda_nu, log_working_prec, point_log_table,
                             recurrence_tables, trace_compatible_units, verify_traces)
from sharpflat.errors import NonConvergent, PrecisionExhausted

P = 3


def matpow_rows(ap, p, kmax):
    """(1,0) A^k for A = [[a_p, p], [-1, 0]], plain integers."""
    rows = [(1, 0)]
    for _ in range(kmax):
        r0, r1 = rows[-1]
        rows.append((r0 * ap + r1 * -1, r0 * p + r1 * 0))
    return rows


@pytest.mark.parametrize("ap", [3, -3, 0, 6])
def test_recurrence_values(ap):
    t = recurrence_tables(10, 10, P, ap)
    assert t.b[1] == 1 and t.b[2] == ap
    assert t.b[3] == ap ** 2 - 1
    assert t.b[4] == ap ** 3 - 2 * ap
    assert all(isinstance(b, int) for b in t.b[1:])
    assert t.x[2] == Fraction(ap * ap - P, P * P)


@pytest.mark.parametrize("ap", [3, -3, 0, 6])
def test_x_matches_matrix_powers(ap):
    t = recurrence_tables(10, 10, P, ap)
    rows = matpow_rows(ap, P, 10)
    for k in range(1, 11):
        assert (t.x[k] * P ** k, t.x[k - 1] * P ** k) == tuple(Fraction(c) for c in rows[k])
    assert t.check_matrix_powers() == []


def test_x_valuation_bound():
    for ap in (3, -3):
        floors = recurrence_tables(12, 12, P, ap).x_floor()
        assert all(v >= -((k + 1) // 2) for k, v in enumerate(floors))


def test_recurrence_bounds():
    with pytest.raises(ValueError):
        recurrence_tables(1, 5)


def test_f_poly():
    R = RingDescriptor(3, 3, 10, m=1)
    u = R.w() + 1
    f = f_poly(u, 6)
    # (u + X)^3 - u^3 = 3u^2 X + 3u X^2 + X^3
    assert f[0].is_zero() and f[1] == u * u * 3 and f[2] == u * 3 and f[3] == R(1)
    # second iterate is f^phi o f
    f2 = f_poly(u.frobenius(), 10).compose(f_poly(u, 10))
    X = Series.var(R, (10,))
    direct = (f_poly(u, 10) + u.frobenius()) ** 3 - u.frobenius() ** 3
    assert (f2 - direct).with_prec(8).is_zero()
    assert (direct - X ** 9).vfloor() >= 1


@pytest.mark.parametrize("ap", [3, -3])
def test_linear_coefficient(ap):
    # m = 0, u = 1: coefficient of X is sum_k x_k p^k, each term an integer
    R = RingDescriptor(3, ap, 6)
    lg = honda_log(R(1), 6, 10)
    rows = matpow_rows(ap, P, 40)
    want = sum(r[0] for r in rows)
    assert (lg.series[1] - R(want)).with_prec(6).is_zero()
    assert (lg.series[1] - 1).vfloor() >= 1


@pytest.mark.parametrize("ap", [3, -3])
def test_log_floor_stable(ap):
    R = RingDescriptor(3, ap, 10)
    floors = [honda_log(R(1), N, 10).floor() for N in (5, 7)]
    assert floors[0] == floors[1]
    # the X^(p^k) coefficient is x_k plus integral terms
    xs = recurrence_tables(2, 2, P, ap).x_floor()
    assert floors[0] == min(xs[1:3])


def test_log_needs_precise_unit():
    R = RingDescriptor(3, 3, 8, m=1)
    with pytest.raises(PrecisionExhausted):
        honda_log(teichmuller(R, [0, 1]), 6, 10)


@pytest.mark.parametrize("ap", [3, -3])
def test_formal_group_base(ap):
    G = formal_group(RingDescriptor(3, ap, 8)(1), 6, 9)
    F = G.F
    assert F[1, 0] == 1 and F[0, 1] == 1 and F[0, 0].is_zero()
    assert all(F[i, 0].is_zero() for i in range(2, 10))
    ax = formal_group_axioms(G)
    assert all(ax.values()), ax


@pytest.mark.parametrize("ap", [3, -3])
def test_lambda_base_ring(ap):
    R = RingDescriptor(3, ap, 8)
    u = R(2)
    b = recurrence_tables(40, 2, P, ap).b
    want = u * sum(b[i] * P ** ((i + 1) // 2) for i in range(1, 40))
    for n in (1, 2, 3):
        assert (lambda_nu(n, u, 8) - want).with_prec(8).is_zero()


def test_lambda_leading_term():
    R = RingDescriptor(3, 3, 40, m=1)
    u = teichmuller(R, [1, 1])
    for n in (1, 2):
        lam = lambda_nu(n, u, 8)
        lead = u.frobenius(-(n + 2)) * 3
        assert (lam - lead).with_prec(2).is_zero()


def test_proof_weights_diverge():
    with pytest.raises(NonConvergent):
        lambda_nu(1, RingDescriptor(3, 3, 8)(1), 8, "proof")


def test_point_log_additive():
    R = RingDescriptor(3, 3, 8, m=1)
    u1 = teichmuller(R, [0, 1])
    u2 = R.w() * 2 + R(1)
    t1 = point_log_table(2, 1, u1, 8)
    t2 = point_log_table(2, 1, u2, 8)
    t12 = point_log_table(2, 1, u1 + u2, 8)
    for n in range(3):
        assert (t12.values[n] - t1.values[n] - t2.values[n]).with_prec(8).is_zero()
    assert t1.convention == DEFAULT_CONVENTION


def test_point_log_precision_stable():
    R6 = RingDescriptor(3, 3, 6)
    R8 = RingDescriptor(3, 3, 8)
    a = point_log_table(1, 0, R6(1), 6).values[1]
    b = point_log_table(1, 0, R8(1), 8).values[1]
    assert (a - b.with_prec(6)).with_prec(6).is_zero()


def test_trace_compatible_units():
    d = trace_compatible_units(3, 3, 1, 8)
    assert d[1].trace(d[0].ring) == d[0]
    assert d[0].valuation() == 0 and d[1].valuation() == 0


@pytest.mark.parametrize("ap", [3, -3])
def test_verify_traces(ap):
    rep = verify_traces(3, ap, 3, 1, 8)
    assert rep["convention"] == {"weights": "recurrence", "twist": "proof"}
    unram = [c for c in rep["cases"] if c["relation"] == "unramified"
             and c["convention"] == "recurrence/proof"]
    assert unram and all(c["pass"] for c in unram)
    # the plain-weight reading of lambda fails once a_p != 0
    assert rep["conventions"]["definition/proof"] is False


def test_definition_weights_pass_when_trace_zero():
    rep = verify_traces(3, 0, 3, 0, 8, [{"weights": "definition", "twist": "proof"}])
    assert rep["convention"] is not None
