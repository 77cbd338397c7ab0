"""The matrices C_n(X), the logarithm matrix, the finite-level matrices H_n
and their annihilators, and growth profiling of series.

With A' = [[a_p, 1], [-p, 0]] and E = [[-1, -1], [beta, alpha]] one has
A' (-1, beta)^T = alpha (-1, beta)^T, so A'^{-k} E = E diag(alpha^-k, beta^-k).
The logarithm matrix is therefore the limit of

    R_k = Q_k E diag(alpha^{-(k+2)}, beta^{-(k+2)}),   Q_k = C_1 ... C_k,

where Q_k has integer polynomial entries.  R_{j} - R_{j-1} only involves
Phi_{p^j}(1+X) - p, whose coefficients below X^M have valuation at least
j - 1 - floor(log_p(M - 1)); that gives the certified tail bound.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from . import _kernel as K
from ._linalg import echelon
from .padic import Element, RingDescriptor
from .series import (GroupRingElement, Mat2, Series, cyclotomic_poly, eval_at,
                     reduce_to_level)
from .errors import PrecisionExhausted, ZeroAtPrecision


def a_prime(ring):
    return [[ring(ring.ap), ring(1)], [ring(-ring.p), ring(0)]]


def e_matrix(qring):
    return [[qring(-1), qring(-1)], [qring.beta(), qring.alpha()]]


def c_matrix(ring, n, cap):
    """C_n(X) = [[a_p, 1], [-Phi_{p^n}(1+X), 0]] over the series ring of `ring`."""
    base = ring.with_(quad=False)
    phi = _cyclo_trunc(base, n, cap)
    return Mat2(Series.constant(base, (cap,), base.ap), Series.one(base, (cap,)),
                -phi, Series.zero(base, (cap,)))


def _cyclo_trunc(ring, n, cap):
    import warnings
    from .errors import CapTooSmallWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapTooSmallWarning)
        return cyclotomic_poly(ring, n, cap)


def _log_floor(M, p):
    return int(math.floor(math.log(M - 1, p) + 1e-12)) if M > 1 else 0


@dataclass
class LogMatrixResult:
    matrix: Mat2                 # entries: Series over the quadratic ring
    depth: int
    prec: int
    cap: int
    certificate: dict
    work_prec: int
    _q: Mat2 = field(repr=False, default=None)
    _t: Series = field(repr=False, default=None)

    def extended(self, extra=1):
        """The matrix with `extra` more factors C_k A'^{-1} multiplied in."""
        q, t, k = self._q, self._t, self.depth
        ring = q.a.ring
        for _ in range(extra):
            t = t ** ring.p
            k += 1
            q = _step(q, _phi_from_power(t, ring.p), ring.ap)
        return _assemble(q, k, self.matrix.a.ring).map(lambda s: s.with_prec(self.prec))


def _phi_from_power(t, p):
    acc = Series.one(t.ring, t.caps)
    cur = acc
    for _ in range(p - 1):
        cur = cur * t
        acc = acc + cur
    return acc


def _step(q, phi, ap):
    # Q C = [[a q00 - phi q01, q00], [a q10 - phi q11, q10]]
    return Mat2(q.a * ap - phi * q.b, q.a, q.c * ap - phi * q.d, q.c)


def _assemble(q, k, qring):
    """Q E diag(alpha^-(k+2), beta^-(k+2)) with exact scalar factors."""
    alpha, beta = qring.alpha(), qring.beta()
    e = k + 2
    ainv = (beta ** e) * Fraction(1, qring.p ** e)      # alpha^-1 = beta / p
    binv = (alpha ** e) * Fraction(1, qring.p ** e)
    lift = lambda s: s.to_ring(qring)
    q00, q01, q10, q11 = (lift(s) for s in q.entries())
    return Mat2((-q00 + q01 * beta) * ainv, (-q00 + q01 * alpha) * binv,
                (-q10 + q11 * beta) * ainv, (-q10 + q11 * alpha) * binv)


def log_matrix(ring, N=None, M=20, margin=None, max_tries=6):
    """The logarithm matrix modulo (p^N, X^M) with a stabilisation certificate."""
    N = ring.N if N is None else N
    p = ring.p
    n_est = math.ceil(math.log(max(M, 2), p)) + 2
    margin = 2 * (n_est + 2) if margin is None else margin
    for _ in range(max_tries):
        try:
            return _log_matrix(ring, N, M, margin)
        except PrecisionExhausted:
            margin *= 2
    raise PrecisionExhausted(f"no stabilisation with margin {margin // 2}")


def _log_matrix(ring, N, M, margin):
    p = ring.p
    K_ = N + margin
    base = RingDescriptor(p, ring.ap, K_)
    qring = base.with_(quad=True, N=K_)
    L = _log_floor(M, p)
    X = Series.var(base, (M,))
    one = Series.one(base, (M,))
    q = Mat2(one, Series.zero(base, (M,)), Series.zero(base, (M,)), one)
    t = (one + X).with_prec(K_)
    prev = None
    k = 0
    while True:
        if k > 0:
            t = t if k == 1 else t ** p
        if k > 0:
            q = _step(q, _phi_from_power(t, p), ring.ap)
        R = _assemble(q, k, qring)
        rprec = min((e.prec for e in R.entries() if e.prec is not None), default=None)
        if rprec is not None and rprec < N:
            raise PrecisionExhausted(f"working precision {K_} exhausted at depth {k}")
        vq = min(e.vfloor() for e in q.entries())
        # tail: for j > k, R_j - R_{j-1} has valuation >= vq + (j - 1 - L) - (j + 2)/2
        tail = Fraction(vq) + Fraction(k + 1, 2) - 2 - L
        if prev is not None and tail >= N:
            same = all((a - b).with_prec(N).is_zero()
                       for a, b in zip(R.entries(), prev.entries()))
            if same:
                cert = {"depth": k, "criterion": "binomial-valuation",
                        "tailValuationBound": str(tail)}
                out = R.map(lambda s: s.with_prec(N))
                return LogMatrixResult(out, k, N, M, cert, K_, q, t)
        prev = R
        k += 1
        if k > 4 * (N + margin + L + 8):
            raise PrecisionExhausted("stabilisation depth bound exceeded")


def log_coefficient_floor(p, j):
    """Lower bound on the valuation of the X^j coefficient of any logarithm-matrix
    entry: the depth-k truncation with k = floor(log_p j) + 1 is off by terms of
    valuation >= -floor(log_p j)/2 - 2, and itself has valuation >= -(k+2)/2."""
    if j < 1:
        return Fraction(-1)
    Lj = int(math.floor(math.log(j, p) + 1e-12))
    return Fraction(-Lj, 2) - 2


def log_tail_bound(p, M, vx):
    """min over j >= M of j*vx + log_coefficient_floor(p, j)."""
    best = None
    j = M
    while True:
        b = j * vx + log_coefficient_floor(p, j)
        best = b if best is None or b < best else best
        # past this point the linear term dominates every remaining floor drop
        if j > M and j * vx - Fraction(1, 2) * math.log(j, p) > best + 4:
            break
        j = j + 1 if j < 4 * M else j * 2
        if j > 10 ** 7:
            break
    return best


def eval_log_matrix(res, x):
    """Evaluate the entries at x with the growth-derived tail bound."""
    vx = x.valuation() if x.ring.quad is False else None
    if vx is None:
        raise ValueError("evaluation point must come from a cyclotomic ring")
    tail = log_tail_bound(x.p, res.cap, vx)
    out = []
    for s in res.matrix.entries():
        val = eval_at(s, x, math.inf)
        out.append(val.with_prec(min(res.prec, math.floor(tail))))
    return Mat2(*out)


def log_matrix_at_root(ring, n):
    """Exact value of the logarithm matrix at zeta_{p^n} - 1 via the finite product."""
    if n < 1:
        raise ValueError("level must be >= 1")
    p = ring.p
    R = RingDescriptor(p, ring.ap, ring.N, n=n, quad=True)
    z = R.zeta()
    x = z - 1
    q = [[R(1), R(0)], [R(0), R(1)]]
    for k in range(1, n + 1):
        phi = sum(((1 + x) ** (p ** (k - 1) * i) for i in range(p)), R(0))
        q = [[q[0][0] * ring.ap - phi * q[0][1], q[0][0]],
             [q[1][0] * ring.ap - phi * q[1][1], q[1][0]]]
    alpha, beta = R.alpha(), R.beta()
    e = n + 2
    ainv = beta ** e * Fraction(1, p ** e)
    binv = alpha ** e * Fraction(1, p ** e)
    (q00, q01), (q10, q11) = q
    return Mat2((-q00 + q01 * beta) * ainv, (-q00 + q01 * alpha) * binv,
                (-q10 + q11 * beta) * ainv, (-q10 + q11 * alpha) * binv)


# ---------------------------------------------------------------------------
# finite level

def h_matrices(ring, n):
    """(H_n, H_n^perp) as exact polynomial matrices at cap p^n + 1.

    H_n = -C_1 ... C_{n-1} diag(1, Phi_{p^n}(1+X)) =: [[a, b], [c, d]] and
    H_n^perp = X [[c, -a], [d, -b]].
    """
    if n < 1:
        raise ValueError("level must be >= 1")
    base = ring.with_(quad=False, n=0, m=0)
    cap = base.p ** n + 1
    one = Series.one(base, (cap,))
    zero = Series.zero(base, (cap,))
    q = Mat2(one, zero, zero, one)
    for k in range(1, n):
        q = q * c_matrix(base, k, cap)
    phi = cyclotomic_poly(base, n, cap)
    H = -(q * Mat2(one, zero, zero, phi))
    X = Series.var(base, (cap,))
    a, b, c, d = H.entries()
    Hp = Mat2(X * c, -(X * a), X * d, -(X * b))
    return H, Hp


def h_matrices_at_level(ring, n):
    """H_n and H_n^perp with entries in the group ring of level n."""
    H, Hp = h_matrices(ring, n)
    red = lambda s: reduce_to_level(s, n)
    return H.map(red), Hp.map(red)


@dataclass
class KernelResult:
    status: str                  # "InRowSpanH" | "NotInRowSpan" | "Undetermined"
    witness: tuple = None        # (a, b) with (a, b) H_n = v when in the span
    perp_product: tuple = None   # v H_n^perp
    perp_zero: bool = None
    adj_product: tuple = None    # v X adj(H_n); vanishes on the row span
    adj_zero: bool = None


def _mult_matrix(h):
    """Matrix of x -> x * h on the (1+X)-power basis (column j = image of T^j)."""
    size = h.data.shape[0]
    coeffs = [int(c) for c in h.data[:, 0]]
    M = K.zeros((size, size))
    for j in range(size):
        for i, c in enumerate(coeffs):
            if c:
                M[(i + j) % size, j] += c
    return M, h.shift


def kernel_membership(v, n, ring=None, N=None, slack=20):
    """Decide whether the pair v lies in the row span (Lambda_n^2) H_n."""
    va, vb = v
    ring = ring or va.ring
    N = N or ring.N
    p = ring.p
    H, Hp = h_matrices_at_level(ring, n)
    size = p ** n
    Kp = N + slack
    # unknowns (a, b); equations (a H00 + b H10, a H01 + b H11) = (va, vb)
    blocks = [[_mult_matrix(H.a)[0], _mult_matrix(H.c)[0]],
              [_mult_matrix(H.b)[0], _mult_matrix(H.d)[0]]]
    A = np.block(blocks).astype(object)
    if va.shift or vb.shift:
        raise ValueError("membership needs integral input")
    rhs = np.concatenate([va.data[:, 0], vb.data[:, 0]]).astype(object) % p ** N
    ech = echelon(A, rhs.reshape(-1, 1), p, Kp)
    col = ech.rhs(0)
    status = "InRowSpanH"
    for t in range(2 * size):
        c = int(col[t]) % p ** N
        e = ech.pivots[t] if t < ech.rank else None
        if e is not None and e < N:
            if c % p ** e:
                status = "NotInRowSpan"
                break
        elif e is not None and e < Kp:
            if c:
                status = "NotInRowSpan"
                break
            status = "Undetermined"
        else:
            if c:
                status = "NotInRowSpan"
                break
    perp = (va * Hp.a + vb * Hp.c, va * Hp.b + vb * Hp.d)
    perp = tuple(x.with_prec(N) for x in perp)
    perp_zero = all(x.is_zero() for x in perp)
    T = GroupRingElement.from_coeffs(ring, n, [0, 1] + [0] * (size - 2)) if size > 1 else None
    Xg = T - 1
    adj = H.adj().map(lambda e: e * Xg)
    adjp = tuple(x.with_prec(N) for x in adj.row_vec_mul(va, vb))
    adj_zero = all(x.is_zero() for x in adjp)
    witness = None
    if status == "InRowSpanH":
        sol = _solve_integral(ech, col, N)
        a = GroupRingElement(ring.with_(N=N), n, np.array(sol[:size], dtype=object), 0, N)
        b = GroupRingElement(ring.with_(N=N), n, np.array(sol[size:], dtype=object), 0, N)
        witness = (a, b)
    return KernelResult(status, witness, perp, perp_zero, adjp, adj_zero)


def _solve_integral(ech, col, N):
    p, Kp = ech.p, ech.K
    r = ech.rank
    y = [0] * ech.ncols
    for t in range(r - 1, -1, -1):
        e = ech.pivots[t]
        if e >= N:
            continue
        acc = int(col[t])
        for j in range(t + 1, r):
            if y[j]:
                acc -= int(ech.M[t, j]) * y[j]
        acc %= p ** Kp
        y[t] = (acc // p ** e) % p ** N
    out = [0] * ech.ncols
    for t in range(ech.ncols):
        out[ech.colperm[t]] = y[t]
    return out


# ---------------------------------------------------------------------------
# growth

@dataclass
class GrowthProfile:
    floors: list                 # running-minimum valuation floor v_j per degree
    order: float                 # slope of -v_j against log_p j at the drops of v_j, j >= p
    residual: float
    sup_samples: list            # [(n, valuation of sup norm on |z| < |zeta_{p^n} - 1|)]
    sup_order: float
    eval_samples: list = None    # [(n, valuation of f(zeta_{p^n} - 1))] for Z_p coefficients


def _lsq(xs, ys):
    n = len(xs)
    if n < 2:
        return 0.0, 0.0
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        return 0.0, 0.0
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    res = math.sqrt(sum((y - my - slope * (x - mx)) ** 2 for x, y in zip(xs, ys)) / n)
    return slope, res


def growth_profile(series_list, levels=None, evaluate=False):
    """Growth data for one series or several (e.g. the four matrix entries)."""
    if isinstance(series_list, Series):
        series_list = [series_list]
    if isinstance(series_list, Mat2):
        series_list = series_list.entries()
    p = series_list[0].p
    M = series_list[0].caps[0]
    raw = []
    for j in range(M):
        vals = []
        for s in series_list:
            c = s[j]
            if not c.is_zero():
                vals.append(c.valuation())
        raw.append(min(vals) if vals else None)
    if all(v is None for v in raw):
        raise ZeroAtPrecision("all coefficients vanish at working precision")
    floors, cur = [], None
    for v in raw:
        if v is not None and (cur is None or v < cur):
            cur = v
        floors.append(cur)
    # fit on the degrees where the running minimum drops (the growth envelope)
    xs, ys = [], []
    for j in range(max(p, 1), M):
        if floors[j] is not None and (floors[j - 1] is None or floors[j] < floors[j - 1]):
            xs.append(math.log(j, p))
            ys.append(-float(floors[j]))
    if len(xs) < 2:
        xs = [math.log(j, p) for j in range(max(p, 1), M) if floors[j] is not None]
        ys = [-float(floors[j]) for j in range(max(p, 1), M) if floors[j] is not None]
    order, resid = _lsq(xs, ys)
    if levels is None:
        levels = [n for n in range(1, 8) if p ** (n - 1) * (p - 1) <= M]
    sups = []
    for n in levels:
        r = Fraction(1, p ** (n - 1) * (p - 1))
        best = None
        for j, v in enumerate(raw):
            if v is not None:
                b = v + j * r
                best = b if best is None or b < best else best
        sups.append((n, best))
    sup_order, _ = _lsq([n for n, _ in sups], [-float(b) for _, b in sups])
    evals = None
    if evaluate and not series_list[0].ring.quad:
        evals = []
        for n in levels:
            R = series_list[0].ring.with_(n=n)
            x = R.zeta() - 1
            vs = []
            for s in series_list:
                try:
                    vs.append(eval_at(s, x).valuation())
                except Exception:
                    pass
            evals.append((n, min(vs) if vs else None))
    return GrowthProfile(floors, order, resid, sups, sup_order, evals)


def log_series(ring, cap):
    """log(1 + X) = sum (-1)^(j+1) X^j / j, truncated."""
    coeffs = [0] + [Fraction((-1) ** (j + 1), j) for j in range(1, cap)]
    return Series.from_coeffs(ring, coeffs, cap)
