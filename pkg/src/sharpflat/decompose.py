"""Sharp/flat decompositions: one- and two-variable solves against the
logarithm matrix, finite-level towers built from Mazur-Tate style elements,
and rank-one factorisation on the diagonal.

Clearing det Log uses the closed form

    det Log(X) = (beta - alpha) / p^2 * log(1 + X) / X

(det C_k = Phi_{p^k}(1+X), det E = beta - alpha, alpha beta = p), so the
inverse is an exact rational series and only the input precision is spent.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math
import random

import numpy as np

from . import _kernel as K
from ._linalg import echelon
from .padic import Element, RingDescriptor
from .series import GroupRingElement, Mat2, Series, lift_nu, project_pi
from .logmatrix import log_matrix, log_coefficient_floor
from .weierstrass import prep1, distinguished_gcd
from .errors import (NotDecomposable, PrecisionExhausted, SingularAtLevel,
                     ZeroAtPrecision)


# ---------------------------------------------------------------------------
# shared pieces

def _quad(ring, N=None):
    return RingDescriptor(ring.p, ring.ap, ring.N if N is None else N, quad=True)


def _base(ring, N=None):
    return RingDescriptor(ring.p, ring.ap, ring.N if N is None else N)


@lru_cache(maxsize=32)
def cached_log_matrix(p, ap, N, M):
    return log_matrix(RingDescriptor(p, ap, N), N, M)


@lru_cache(maxsize=64)
def _inv_log_ratio(M):
    """Coefficients of X / log(1 + X) up to X^(M-1), exact."""
    l = [Fraction((-1) ** j, j + 1) for j in range(M)]
    g = [Fraction(1)]
    for n in range(1, M):
        g.append(-sum(l[i] * g[n - i] for i in range(1, n + 1)))
    return tuple(g)


def inverse_log_det(qring, M):
    """1 / det Log as a series over the quadratic ring, to X^M."""
    p, ap = qring.p, qring.ap
    # p^2/(beta - alpha) = p^2 (beta - alpha) / (a_p^2 - 4p)
    scal = (qring.beta() - qring.alpha()) * Fraction(p * p, ap * ap - 4 * p)
    return Series.from_coeffs(qring, [scal * c for c in _inv_log_ratio(M)], M)


def det_log_closed_form(qring, M):
    p, ap = qring.p, qring.ap
    scal = (qring.beta() - qring.alpha()) * Fraction(1, p * p)
    return Series.from_coeffs(qring, [scal * Fraction((-1) ** j, j + 1) for j in range(M)], M)


def inverse_loss(p, M):
    """Digits lost multiplying by X/log(1+X) to X^M (minus its valuation floor)."""
    g = _inv_log_ratio(M)
    worst = 0
    for c in g:
        if c:
            worst = min(worst, K.vp(c.numerator, p) - K.vp(c.denominator, p))
    return -worst


def decompose_input_prec(p, N, M, nvars=1):
    """Input precision that lets a decomposition certify p^N at cap M."""
    adj = math.ceil(-log_coefficient_floor(p, M - 1)) + 2
    return N + nvars * (inverse_loss(p, M) + 2 * adj + 4)


def _descend(s, N, what):
    """Series over the quadratic ring -> Z_p-series mod p^N, or NotDecomposable."""
    s = s.with_prec(N)
    p = s.p
    mod = p ** (N + s.shift)
    data = s.data % mod if s.shift >= -N else s.data
    irr = data[..., 1]
    rat = data[..., 0]
    if any(int(x) % mod for x in np.asarray(irr).flat):
        raise NotDecomposable(f"{what}: solution is not Z_p-rational")
    sh = s.shift
    if sh > 0:
        bad = [int(x) for x in np.asarray(rat).flat if int(x) % p ** sh]
        if bad:
            v = min(K.vp(x, p) for x in bad) - sh
            raise NotDecomposable(f"{what}: coefficient of valuation {v} < 0")
        rat = np.vectorize(lambda x: int(x) // p ** sh, otypes=[object])(rat)
        sh = 0
    base = _base(s.ring, N)
    out = np.asarray(rat, dtype=object).reshape(s.caps + base.shape)
    return Series(base, s.caps, out, sh, N)


# ---------------------------------------------------------------------------
# one variable

@dataclass
class LPair:
    sharp: Series
    flat: Series
    provenance: str = "synthetic"
    certificate: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.sharp, self.flat))

    def __eq__(self, other):
        return self.sharp == other.sharp and self.flat == other.flat


def random_pair(ring, M, seed, N=None):
    rng = random.Random(seed)
    N = ring.N if N is None else N
    base = _base(ring, N)
    # exact integers below p^N
    mk = lambda: Series.from_coeffs(base, [rng.randrange(base.p ** N) for _ in range(M)], M)
    return LPair(mk(), mk())


def compose1(pair, N, M):
    """(L_alpha, L_beta) = (L_sharp, L_flat) Log(X), modulo (p^N, X^M)."""
    s, f = pair
    ring = s.ring
    L = cached_log_matrix(ring.p, ring.ap, N, M).matrix
    q = L.a.ring
    s, f = s.to_ring(q).truncate((M,)), f.to_ring(q).truncate((M,))
    la, lb = L.row_vec_mul(s, f)
    return la.with_prec(N), lb.with_prec(N)


def decompose1(l_alpha, l_beta, N, M=None):
    """The integral pair with compose1(pair) = (l_alpha, l_beta)."""
    M = l_alpha.caps[0] if M is None else M
    ring = l_alpha.ring
    p, ap = ring.p, ring.ap
    prec_in = _pmin_all(l_alpha.prec, l_beta.prec, ring.N)
    L = cached_log_matrix(p, ap, prec_in, M).matrix
    q = L.a.ring
    la = l_alpha.to_ring(q).truncate((M,)) if l_alpha.ring != q else l_alpha.truncate((M,))
    lb = l_beta.to_ring(q).truncate((M,)) if l_beta.ring != q else l_beta.truncate((M,))
    u, v = L.adj().row_vec_mul(la, lb)
    g = inverse_log_det(q, M)
    s, f = u * g, v * g
    got = _pmin_all(s.prec, f.prec, prec_in)
    if got < N:
        need = decompose_input_prec(p, N, M)
        raise PrecisionExhausted(f"solution known to p^{got} < p^{N}; supply input to p^{need}")
    s = _descend(s, N, "sharp")
    f = _descend(f, N, "flat")
    cert = {"minValuation": str(min(s.vfloor(), f.vfloor(), N)), "tolerance": 0,
            "inputPrec": int(prec_in), "solutionPrec": int(got)}
    return LPair(s, f, "ingested", cert)


def _pmin_all(*vals):
    vals = [v for v in vals if v is not None]
    return min(vals)


# ---------------------------------------------------------------------------
# two variables

def embed(f, caps, axis):
    """One-variable series f placed along `axis` of a series with the given caps."""
    caps = tuple(caps)
    data = K.zeros(caps + f.ring.shape)
    n = min(caps[axis], f.caps[0])
    idx = [0] * len(caps)
    for j in range(n):
        idx[axis] = j
        data[tuple(idx)] = f.data[j]
    return Series(f.ring, caps, data, f.shift, f.prec)


def _log_pair(p, ap, N, caps):
    LX = cached_log_matrix(p, ap, N, caps[0]).matrix.map(lambda s: embed(s, caps, 0))
    LY = cached_log_matrix(p, ap, N, caps[1]).matrix.map(lambda s: embed(s, caps, 1))
    return LX, LY


def random_four(ring, caps, seed, N=None):
    rng = random.Random(seed)
    N = ring.N if N is None else N
    base = _base(ring, N)
    caps = tuple(caps)

    def mk():
        data = K.zeros(caps + base.shape)
        for idx in np.ndindex(caps):
            data[idx] = rng.randrange(base.p ** N)
        return Series(base, caps, data, 0, None)
    return Mat2(mk(), mk(), mk(), mk())


def compose2(mat, N, caps=None):
    """Log(Y)^T mat Log(X) over the quadratic ring."""
    caps = mat.a.caps if caps is None else tuple(caps)
    ring = mat.a.ring
    LX, LY = _log_pair(ring.p, ring.ap, N, caps)
    q = LX.a.ring
    m = mat.map(lambda s: s.to_ring(q).truncate(caps))
    return (LY.transpose() * m * LX).map(lambda s: s.with_prec(N))


def decompose2(four, N, caps=None):
    """Integral 2x2 matrix M with Log(Y)^T M Log(X) = four."""
    caps = four.a.caps if caps is None else tuple(caps)
    ring = four.a.ring
    p, ap = ring.p, ring.ap
    prec_in = _pmin_all(*(e.prec for e in four.entries()), ring.N)
    LX, LY = _log_pair(p, ap, prec_in, caps)
    q = LX.a.ring
    gx = embed(inverse_log_det(q, caps[0]), caps, 0)
    gy = embed(inverse_log_det(q, caps[1]), caps, 1)
    four = four.map(lambda s: s.to_ring(q).truncate(caps) if s.ring != q else s.truncate(caps))
    # solve in X row by row, then in Y column by column
    rows = (four * LX.adj()).map(lambda s: s * gx)
    out = (LY.adj().transpose() * rows).map(lambda s: s * gy)
    got = _pmin_all(*(e.prec for e in out.entries()), prec_in)
    if got < N:
        need = decompose_input_prec(p, N, max(caps), 2)
        raise PrecisionExhausted(f"solution known to p^{got} < p^{N}; supply input to p^{need}")
    names = ("sharp-sharp", "flat-sharp", "sharp-flat", "flat-flat")
    ents = [_descend(e, N, nm) for e, nm in zip(out.entries(), names)]
    return Mat2(*ents)


def swap_xy(f):
    return Series(f.ring, (f.caps[1], f.caps[0]), np.swapaxes(f.data, 0, 1), f.shift, f.prec)


def restrict_diag(f):
    """f(X, X), complete up to the smaller cap."""
    M = min(f.caps)
    out = K.zeros((M,) + f.ring.shape)
    for a in range(M):
        for b in range(M - a):
            out[a + b] = out[a + b] + f.data[a, b]
    return Series(f.ring, (M,), out, f.shift, f.prec)


# ---------------------------------------------------------------------------
# finite level towers

@dataclass
class StabilizedTower:
    xi: str
    levels: dict            # n -> GroupRingElement over the quadratic ring
    theta: list

    def compatible(self, n):
        """pi(L^(n+1)) == L^(n)."""
        return project_pi(self.levels[n + 1]) == self.levels[n]


def _gr_to_ring(e, ring):
    if e.ring == ring:
        return e
    lifted = [e[i].to_ring(ring) for i in range(e.data.shape[0])]
    s = max(x.shift for x in lifted)
    data = np.stack([x.data * e.p ** (s - x.shift) for x in lifted])
    return GroupRingElement(ring, e.level, data, s, e.prec)


def _gr_scale(e, c):
    return e * c


def _xi(qring, xi):
    if xi == "alpha":
        return qring.alpha(), qring.beta()
    if xi == "beta":
        return qring.beta(), qring.alpha()
    raise ValueError(f"xi must be 'alpha' or 'beta', not {xi!r}")


def stabilized_level(theta_n, theta_nm1, xi, qring):
    """xi^-(n+1) (xi theta_n - nu(theta_{n-1})), theta_{-1} = 0."""
    n = theta_n.level
    x, xbar = _xi(qring, xi)
    xinv = xbar * Fraction(1, qring.p)          # alpha beta = p
    t = _gr_to_ring(theta_n, qring)
    acc = _gr_scale(t, x)
    if n >= 1 and theta_nm1 is not None:
        acc = acc - _gr_to_ring(lift_nu(theta_nm1), qring)
    return _gr_scale(acc, xinv ** (n + 1))


def stabilize(theta, xi, N=None):
    base = theta[0].ring
    qring = _quad(base, N)
    levels = {}
    for n, t in enumerate(theta):
        levels[n] = stabilized_level(t, theta[n - 1] if n else None, xi, qring)
    return StabilizedTower(xi, levels, list(theta))


def three_term_defect(theta, n):
    """pi(theta_{n+1}) - (a_p theta_n - nu(theta_{n-1})), theta_{-1} = 0."""
    ap = theta[0].ring.ap
    rhs = theta[n] * ap
    if n >= 1:
        rhs = rhs - lift_nu(theta[n - 1])
    return project_pi(theta[n + 1]) - rhs


def random_theta_tower(ring, n_max, seed, N=None):
    """Integral theta_0..theta_{n_max} satisfying the three-term relation."""
    rng = random.Random(seed)
    N = ring.N if N is None else N
    base = _base(ring, N)
    p = base.p
    theta = [GroupRingElement.from_coeffs(base, 0, [rng.randrange(p ** N)])]
    for n in range(n_max):
        target = theta[n] * base.ap
        if n >= 1:
            target = target - lift_nu(theta[n - 1])
        size = p ** (n + 1)
        r = [rng.randrange(p ** N) for _ in range(size)]
        # kill the projection of r, then add a section of the target
        rp = [sum(r[i::p ** n]) for i in range(p ** n)]
        tgt = [int(target[i].coords()[0]) for i in range(p ** n)]
        r = [r[i] - (rp[i] if i < p ** n else 0) + (tgt[i] if i < p ** n else 0) for i in range(size)]
        theta.append(GroupRingElement.from_coeffs(base, n + 1, r))
    return theta


def level_matrix(ring, n, N=None):
    """M_n = C_1 ... C_n E diag(alpha, beta)^-(n+1) in Lambda_n over the quadratic ring.

    This is (Log mod omega_n) diag(alpha, beta): the exponent n+1 is the one for
    which (s, f) M_n has the stabilised form xi^-(n+1) (xi theta_n - nu theta_{n-1}).
    """
    qring = _quad(ring, N)
    base = _base(ring, N)
    p = base.p
    size = p ** n
    one = GroupRingElement.one(base, n)
    zero = one * 0
    q = Mat2(one, zero, zero, one)
    for i in range(1, n + 1):
        phi = [0] * size
        for j in range(p):
            phi[(j * p ** (i - 1)) % size] += 1
        ph = GroupRingElement.from_coeffs(base, n, phi)
        c = Mat2(one * base.ap, one, -ph, zero)
        q = q * c
    alpha, beta = qring.alpha(), qring.beta()
    e = n + 1
    ainv = beta ** e * Fraction(1, p ** e)
    binv = alpha ** e * Fraction(1, p ** e)
    lift = lambda g: _gr_to_ring(g, qring)
    q00, q01, q10, q11 = (lift(g) for g in q.entries())
    sc = _gr_scale
    return Mat2(sc(sc(q01, beta) - q00, ainv), sc(sc(q01, alpha) - q00, binv),
                sc(sc(q11, beta) - q10, ainv), sc(sc(q11, alpha) - q10, binv))


@dataclass
class FiniteDecomposition:
    sharp: GroupRingElement
    flat: GroupRingElement
    certificate: dict


def _mult_block(h, size):
    """Integer matrix of x -> x h (x with Z_p coefficients) into quad coordinates."""
    rows = []
    for qc in range(h.data.shape[1]):
        M = K.zeros((size, size))
        for j in range(size):
            for i in range(size):
                M[(i + j) % size, j] += int(h.data[i, qc])
        rows.append(M)
    return np.concatenate(rows, axis=0)


def decompose_finite(theta_n, theta_nm1, n, N, strict=False):
    """Solve (L_alpha^(n), L_beta^(n)) = (s, f) M_n with s, f in Lambda_n."""
    if n < 1:
        raise ValueError("level must be at least 1")
    base = theta_n.ring
    p = base.p
    Mn = level_matrix(base, n, N + 4 * n + 8)
    qring = Mn.a.ring
    La = stabilized_level(theta_n, theta_nm1, "alpha", qring)
    Lb = stabilized_level(theta_n, theta_nm1, "beta", qring)
    size = p ** n
    S = max(max(e.shift for e in Mn.entries()), La.shift, Lb.shift)
    sc = lambda e: e.data * p ** (S - e.shift)
    up = lambda e: GroupRingElement(qring, n, sc(e), 0, None)
    # (s, f) M = (s a + f c, s b + f d): columns of the system for s then f
    A = np.block([[_mult_block(up(Mn.a), size), _mult_block(up(Mn.c), size)],
                  [_mult_block(up(Mn.b), size), _mult_block(up(Mn.d), size)]])
    rhs = np.concatenate([np.concatenate([sc(La)[:, k] for k in range(2)]),
                          np.concatenate([sc(Lb)[:, k] for k in range(2)])]).astype(object)
    Kw = N + S + 2 * n + 8
    ech = echelon(A, rhs.reshape(-1, 1), p, Kw)
    col = ech.rhs(0)
    if any(int(c) % p ** Kw for c in col[ech.rank:]):
        raise NotDecomposable("level-n system is inconsistent")
    free = 2 * size - ech.rank
    if free and strict:
        raise SingularAtLevel(f"{free} undetermined components at level {n}")
    Y, E = ech.back_substitute(0)
    obstr = ech.integral_obstruction(0, min(Kw, N + max(ech.pivots, default=0)))
    prec = Kw - E - S
    s = GroupRingElement(base.with_(N=N), n, np.array(Y[:size], dtype=object), E, min(prec, N))
    f = GroupRingElement(base.with_(N=N), n, np.array(Y[size:], dtype=object), E, min(prec, N))
    cert = {"rank": ech.rank, "free": free, "integralSolvable": not obstr,
            "pivotValuations": list(ech.pivots), "prec": min(prec, N)}
    return FiniteDecomposition(s, f, cert)


def tower_from_pair(pair, n_max):
    """theta_0..theta_{n_max} whose stabilisations are (s, f) M_n at each level.

    theta_n = (alpha^(n+1) L_alpha - beta^(n+1) L_beta) / (alpha - beta)
            = -(s, f) Q_n (0, 1)^T,  reduced to level n; then
    xi theta_n - xi^(n+1) L_xi = (s, f) Q_n (1, -a_p)^T = Phi_{p^n} (s, f) Q_{n-1} (0, -1)^T
    which is nu(theta_{n-1}).
    """
    s, f = pair
    base = s.ring
    p, ap = base.p, base.ap
    out = []
    for n in range(n_max + 1):
        size = p ** n
        sn = _series_to_level(s, n)
        fn = _series_to_level(f, n)
        one = GroupRingElement.one(base, n)
        zero = one * 0
        q = Mat2(one, zero, zero, one)
        for i in range(1, n + 1):
            phi = [0] * size
            for j in range(p):
                phi[(j * p ** (i - 1)) % size] += 1
            q = q * Mat2(one * ap, one, -GroupRingElement.from_coeffs(base, n, phi), zero)
        out.append(-(sn * q.b + fn * q.d))
    return out


def _series_to_level(s, n):
    from .series import reduce_to_level
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return reduce_to_level(s, n)


# ---------------------------------------------------------------------------
# rank one on the diagonal

@dataclass
class RankOne:
    col: tuple
    row: tuple
    prec: int
    cap: int                # outer product certified modulo (p^prec, X^cap)


@dataclass
class NotRankOne:
    reason: str
    minor: object = None

    def __bool__(self):
        return False


def _prep(f):
    try:
        return prep1(f)
    except ZeroAtPrecision:
        return None


def _poly_divexact(num, den, prec):
    """num / den for coefficient lists with den monic; None unless the remainder vanishes."""
    num = list(num)
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return None if any(not c.with_prec(prec).is_zero() for c in num) else []
    q = [None] * (len(num) - dd)
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k]
        q[k - dd] = c
        for i in range(dd + 1):
            num[k - dd + i] = num[k - dd + i] - c * den[i]
    if any(not c.with_prec(prec).is_zero() for c in num[:dd]):
        return None
    return q


def _quotient(P, D, mu, prec, cap):
    """(p^P.mu D_P U_P) / (p^mu D): exact via the distinguished parts."""
    if P.mu < mu:
        return None
    qc = _poly_divexact(P.distinguished_coeffs(), [D[i] for i in range(D.caps[0])], prec)
    if qc is None:
        return None
    ring = P.unit.ring
    poly = Series.from_coeffs(ring, qc or [0], cap)
    return (poly * P.unit.truncate((cap,))).mul_p_power(P.mu - mu)


def rank1_factor(mat):
    """col, row with mat = col^T row, col's first nonzero entry p^mu D (monic D)."""
    ents = mat.entries()
    if all(e.is_zero() for e in ents):
        return NotRankOne("zero matrix")
    det = mat.det()
    if not det.is_zero():
        return NotRankOne("nonvanishing minor", det)
    cap = mat.a.caps[0]
    preps = [[_prep(e) for e in row] for row in mat.rows()]
    live_all = [x for r in preps for x in r if x is not None]
    prec = min(x.determined for x in live_all)
    # unit parts of truncated inputs are off by about p^((cap - lam - k) s) at
    # degree k, s the smallest root valuation of a distinguished factor
    slopes = [_min_root_valuation(x.distinguished_coeffs()) for x in live_all if x.lam]
    if slopes:
        sv = min(slopes)
        lam = max(x.lam for x in live_all)
        prec = min(prec, math.floor((cap - lam - cap // 2) * sv))
        cut = cap - lam - math.ceil(prec / sv)
    else:
        cut = cap
    if prec < 1 or cut < 1:
        return NotRankOne("truncation leaves no certified coefficients")

    i0 = 0 if any(x is not None for x in preps[0]) else 1
    row_p = preps[i0]
    live = [x for x in row_p if x is not None]
    mu = min(x.mu for x in live)
    G = live[0].distinguished
    for x in live[1:]:
        G = distinguished_gcd(G, x.distinguished.with_prec(prec))
    ring = mat.a.ring
    row = []
    for x in row_p:
        if x is None:
            row.append(Series.zero(ring, (cap,)))
            continue
        r = _quotient(x, G, mu, prec, cap)
        if r is None:
            return NotRankOne("row entries do not share the computed gcd")
        row.append(r)
    gpoly = Series.from_coeffs(ring, [G[i] for i in range(G.caps[0])], cap).mul_p_power(mu)
    col = [None, None]
    col[i0] = gpoly
    other = 1 - i0
    j = min((j for j in range(2) if row_p[j] is not None), key=lambda j: row_p[j].lam)
    rp = _prep(row[j])
    op = preps[other][j]
    if op is None:
        col[other] = Series.zero(ring, (cap,))
    else:
        c = _quotient(op, rp.distinguished, rp.mu, prec, cap)
        if c is None:
            return NotRankOne("second row is not a multiple of the first")
        col[other] = c * rp.unit.truncate((cap,)).inverse()
    col = [c.truncate((cut,)).with_prec(prec) for c in col]
    row = [r.truncate((cut,)).with_prec(prec) for r in row]
    for i in range(2):
        for jj in range(2):
            if not (col[i] * row[jj] - mat[i, jj].truncate((cut,))).with_prec(prec).is_zero():
                return NotRankOne("outer product does not reproduce the input")
    return RankOne(tuple(col), tuple(row), prec, cut)


def _min_root_valuation(d):
    lam = len(d) - 1
    best = None
    for i in range(lam):
        if d[i].is_zero():
            continue
        s = Fraction(d[i].valuation()) / (lam - i)
        best = s if best is None else min(best, s)
    return best if best is not None else Fraction(d[0].prec if d[0].prec else 1, lam)
