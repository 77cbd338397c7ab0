"""Weierstrass preparation in one and two variables.

A truncated input is read as the polynomial its coefficients define.  The
distinguished factor comes from the contraction iteration
``q <- C^{-1} (1 - tau_lambda(q B))`` run at a padded cap, so the unit
``U = 1/q`` and the identity ``f = p^mu D U`` are exact at the working
precision.  How much of D is pinned down by the truncation (as opposed to
the unseen tail of a genuine power series) is reported as ``determined``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernel as K
from .series import Series
from .errors import (LambdaExceedsCap, NonConvergent, NotPreparable, StageLambdaExceedsCap,
                     UnsupportedRing, ZeroAtPrecision)


def _check_ring(ring):
    if ring.quad or ring.n:
        raise UnsupportedRing("preparation needs an unramified coefficient ring "
                              "(integer valuations)")


def newton_invariants(f, mu=None):
    """(mu, lambda) read off coefficient valuations of a one-variable series."""
    _check_ring(f.ring)
    best, lam = None, None
    for j, c in enumerate(f.coeffs()):
        if c.is_zero():
            continue
        v = c.valuation()
        if best is None or v < best:
            best, lam = v, j
    if best is None:
        raise ZeroAtPrecision("series vanishes at working precision")
    if f.prec is not None and best >= f.prec:
        raise ZeroAtPrecision("mu is at least the working precision")
    if mu is not None and best != mu:
        raise LambdaExceedsCap(f"no coefficient below the cap {f.caps[0]} has valuation {mu}")
    return int(best), lam


@dataclass
class PrepFactorization:
    mu: int
    lam: int
    distinguished: Series       # monic, cap lam + 1
    unit: Series
    prec: int                   # precision at which the recomposition is verified
    determined: int             # precision to which D is fixed by the truncated input

    def recompose(self):
        D = self.distinguished.pad(self.unit.caps)
        return (D * self.unit).mul_p_power(self.mu)

    def distinguished_coeffs(self):
        return [self.distinguished[i] for i in range(self.lam + 1)]

    def unit_constant(self):
        return self.unit[(0,) * self.unit.nvars]


def _split(h, lam, axis):
    """(low, high): low keeps degrees < lam along `axis`, high = sum_{j>=lam} h_j T^(j-lam)."""
    moved = np.moveaxis(h.data, axis, 0)
    low = K.zeros(moved.shape)
    low[:lam] = moved[:lam]
    high = K.zeros(moved.shape)
    high[:moved.shape[0] - lam] = moved[lam:]
    mk = lambda d: Series(h.ring, h.caps, np.moveaxis(d, 0, axis), h.shift, h.prec)
    return mk(low), mk(high)


def _pad_axis(h, axis, cap):
    caps = list(h.caps)
    caps[axis] = cap
    return h.pad(tuple(caps))


def _contract(g, lam, axis, iters):
    """Run the preparation iteration along `axis`; returns (D, q) with q g = D."""
    low, high = _split(g, lam, axis)
    cinv = high.inverse()
    one = Series.one(g.ring, g.caps)
    q = cinv
    for _ in range(iters):
        qn = cinv * (one - _split(q * low, lam, axis)[1])
        if qn == q:
            q = qn
            break
        q = qn
    else:
        raise NonConvergent("preparation iteration did not stabilise")
    D = q * g
    return D, q


def _mono(ring, caps, axis, lam):
    idx = [0] * len(caps)
    idx[axis] = lam
    data = K.zeros(tuple(caps) + ring.shape)
    data[tuple(idx) + (0,) * len(ring.shape)] = 1
    return Series(ring, caps, data)


def _prepare_axis(g, lam, axis, extra):
    """Distinguished factor of `g` along `axis` and the matching unit, at g's caps."""
    cap = g.caps[axis]
    work = g.prec if g.prec is not None else g.ring.N
    if lam == 0:
        return Series.one(g.ring, tuple(c if i != axis else 1 for i, c in enumerate(g.caps))), g
    padded = cap + lam * (work + extra + 2) + 1
    gp = _pad_axis(g, axis, padded)
    D, q = _contract(gp, lam, axis, iters=4 * (work + extra + padded // lam) + 10)
    # D = T^lam - r; keep degrees <= lam along the axis
    dcaps = list(gp.caps)
    dcaps[axis] = lam + 1
    D = D.truncate(tuple(dcaps))
    lead = _mono(g.ring, tuple(dcaps), axis, lam)
    # force exact monic leading coefficient (q g has lead 1 at precision)
    moved = np.moveaxis(D.data, axis, 0).copy()
    moved[lam] = 0
    D = Series(g.ring, tuple(dcaps), np.moveaxis(moved, 0, axis), D.shift, D.prec) + lead
    unit = q.inverse().truncate(g.caps)
    return D, unit


def prep1(f, mu=None):
    """Weierstrass preparation of a one-variable series."""
    mu, lam = newton_invariants(f, mu)
    g = f.mul_p_power(-mu)
    D, U = _prepare_axis(g, lam, 0, 0)
    M = f.caps[0]
    check = (D.pad((M,)) * U).mul_p_power(mu) - f
    prec = f.prec if f.prec is not None else f.ring.N
    if not check.with_prec(prec).is_zero():
        raise NonConvergent("recomposition failed at working precision")
    # unseen coefficients of index >= M reach D only through (M - lam)/lam
    # contractions; D is normalised without p^mu, so the bound is relative
    determined = prec - mu if lam == 0 else min(prec - mu, max(0, (M - lam) // lam))
    return PrepFactorization(mu, lam, D, U, prec, determined)


def distinguished_part(f):
    """Distinguished polynomial of f (after removing p^mu) and its lambda."""
    res = prep1(f)
    return res.distinguished, res.lam


def poly_mod(a, b):
    """Remainder of a polynomial `a` on division by a monic polynomial `b` (cap lam+1)."""
    db = b.caps[0] - 1
    coeffs = [a[j] for j in range(a.caps[0])]
    bc = [b[i] for i in range(db + 1)]
    for k in range(len(coeffs) - 1, db - 1, -1):
        c = coeffs[k]
        if c.is_zero():
            continue
        for i in range(db + 1):
            coeffs[k - db + i] = coeffs[k - db + i] - c * bc[i]
    rem = coeffs[:db] if db > 0 else []
    if not rem:
        return None
    return Series.from_coeffs(a.ring, rem, max(db, 1))


def distinguished_gcd(a, b):
    """gcd of two distinguished polynomials (Series of cap deg + 1) in O[[X]]."""
    while True:
        if a.caps[0] < b.caps[0]:
            a, b = b, a
        if b.caps[0] == 1:
            return b
        r = poly_mod(a, b)
        if r is None or r.is_zero():
            return b
        rd, _ = distinguished_part(r)
        a, b = b, rd


@dataclass
class TwoVarPrep:
    mu: int
    factors: list                       # [(variable, Series)]
    unit: Series
    prec: int
    order: tuple = ("X", "Y")
    lambdas: dict = field(default_factory=dict)

    def recompose(self):
        caps = self.unit.caps
        acc = self.unit
        for var, D in self.factors:
            acc = acc * _embed2(D, var, caps)
        return acc.mul_p_power(self.mu)

    def ideal_violations(self):
        """Non-leading coefficients of the factor in the i-th variable must lie in
        (p, earlier variables); list every offending (variable, degree)."""
        bad = []
        p = self.unit.p
        for var, D in self.factors:
            lam = self.lambdas[var]
            for l in range(lam):
                c = _factor_coeff(D, var, l)
                c0 = c[(0,) * c.nvars] if isinstance(c, Series) else c
                if not c0.is_zero() and c0.valuation() < 1:
                    bad.append((var, l))
        return bad


def _factor_coeff(D, var, l):
    if D.nvars == 1:
        return D[l]
    if var == "X":
        return Series(D.ring, (D.caps[1],), D.data[l], D.shift, D.prec)
    return Series(D.ring, (D.caps[0],), D.data[:, l], D.shift, D.prec)


def _embed2(D, var, caps):
    """View a factor as a two-variable series at `caps`."""
    if D.nvars == 2:
        return D.pad(caps) if D.caps != caps else D
    if var == "X":
        data = D.data.reshape((D.caps[0], 1) + D.ring.shape)
    else:
        data = D.data.reshape((1, D.caps[0]) + D.ring.shape)
    s = Series(D.ring, data.shape[:2], data, D.shift, D.prec)
    return s.pad(caps)


def _swap(f):
    data = np.swapaxes(f.data, 0, 1)
    return Series(f.ring, (f.caps[1], f.caps[0]), data, f.shift, f.prec)


def _y_coeff(g, j):
    return Series(g.ring, (g.caps[0],), g.data[:, j], g.shift, g.prec)


def _divide_x(g, D1):
    """Exact division of every Y-coefficient of g by the distinguished D1(X)."""
    lam = D1.caps[0] - 1
    if lam == 0:
        return g
    MX = g.caps[0]
    work = g.prec if g.prec is not None else g.ring.N
    padded = MX + lam * (work + 2) + 1
    D = D1.pad(padded)
    # 1/D is not a power series; divide with q <- tau(g) - tau(q B)
    low, _ = _split(D, lam, 0)
    cols = []
    for j in range(g.caps[1]):
        h = _y_coeff(g, j).pad(padded)
        t_h = _split(h, lam, 0)[1]
        q = t_h
        for _ in range(4 * (work + padded // lam) + 10):
            qn = t_h - _split(q * low, lam, 0)[1]
            if qn == q:
                break
            q = qn
        else:
            raise NonConvergent("division by the X-content did not stabilise")
        rem = h - q * D
        if not rem.truncate(MX).with_prec(work).is_zero():
            raise NonConvergent("X-content does not divide a coefficient")
        cols.append(_col_series(g, q.truncate(MX), j))
    out = cols[0]
    for c in cols[1:]:
        out = out + c
    return out


def _col_series(g, s, j):
    data = K.zeros(g.caps + g.ring.shape)
    data[:, j] = s.data
    return Series(g.ring, g.caps, data, s.shift, s.prec)


def _y_content(g):
    """gcd in O[[X]] of the Y-coefficients of g, as a distinguished polynomial."""
    content = None
    for j in range(g.caps[1]):
        h = _y_coeff(g, j)
        if h.is_zero():
            continue
        D, lam = distinguished_part(h)
        content = D if content is None else distinguished_gcd(content, D)
        if content.caps[0] == 1:
            break
    return content


def prep2(f, order=("X", "Y"), general=False):
    """Preparation of a two-variable series: p^mu * D1(X) * D2(X, Y) * U.

    D1 is the X-content (gcd of the Y-coefficients), distinguished in X with
    coefficients in (p); D2 is distinguished in Y with non-leading
    coefficients in (p, X).  ``order=("Y", "X")`` swaps the roles.  When
    ``general`` is set the caller asserts the content-free part is general
    in the second variable, so a vanishing reduction is blamed on the cap.
    """
    _check_ring(f.ring)
    if f.nvars != 2:
        raise ValueError("prep2 needs a two-variable series")
    swapped = tuple(order) == ("Y", "X")
    g = _swap(f) if swapped else f
    if g.is_zero():
        raise ZeroAtPrecision("series vanishes at working precision")
    prec = f.prec if f.prec is not None else f.ring.N
    mu = g.vfloor()
    if mu >= prec:
        raise ZeroAtPrecision("mu is at least the working precision")
    g = g.mul_p_power(-mu)
    D1 = _y_content(g)
    lam1 = D1.caps[0] - 1
    g2 = _divide_x(g, D1)
    # reduction modulo (p, X): first Y-degree whose X^0 coefficient is a unit
    lam2 = None
    for j in range(g2.caps[1]):
        c = g2[0, j]
        if not c.is_zero() and c.valuation() == 0:
            lam2 = j
            break
    if lam2 is None:
        if general:
            raise StageLambdaExceedsCap(f"lambda in the second variable reaches the cap {g2.caps[1]}")
        raise NotPreparable("content-free part vanishes modulo (p, X); "
                            "a change of variables is needed")
    D2, U = _prepare_axis(g2, lam2, 1, g2.caps[0])
    names = tuple(order)
    factors = []
    if lam1:
        factors.append((names[0], D1))
    if lam2:
        factors.append((names[1], D2))
    if swapped:
        U = _swap(U)
        factors = [(v, _swap(D) if D.nvars == 2 else D) for v, D in factors]
    res = TwoVarPrep(int(mu), factors, U, prec, names, {names[0]: lam1, names[1]: lam2})
    if not (res.recompose() - f).with_prec(prec).is_zero():
        raise NonConvergent("two-variable recomposition failed at working precision")
    return res
