"""Honda-type logarithms, the formal group they define, and the logarithms of
a trace-compatible system of points.

The point logarithm at level (n, m) is

    log c_(n,m) = lambda_n + sum_{k < n} x_k (zeta_{p^(n-k)} - 1) u_k

with u = d_m a trace-compatible unit.  ``twist`` chooses u_k = u (plain)
or u_k = u^{phi^(k-n)}; ``weights`` chooses the coefficients w_i in
lambda_n = sum_i w_i u^{phi^-(n+i+1)}:

* "definition": b_i p^ceil(i/2)
* "proof":      b_i
* "recurrence": p^i x_{i-1}, the unique choice making the cyclotomic trace
  relation hold for every a_p (w_1 = p, w_2 = a_p p, w_{i+2} = a_p w_{i+1} - p w_i)
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .padic import Element, RingDescriptor, teichmuller
from .series import Series, revert
from .errors import IntegralityViolation, NonConvergent, PrecisionExhausted, ZeroResidue

WEIGHTS = ("definition", "proof", "recurrence")
TWISTS = ("definition", "proof")
DEFAULT_CONVENTION = {"weights": "recurrence", "twist": "proof"}


@dataclass
class RecurrenceTables:
    ap: int
    p: int
    b: list          # b[0] unused (None); b[1] = 1, b[2] = a_p, ...
    x: list          # Fractions x_0, x_1, ...

    def x_floor(self):
        """Observed valuation of each x_k (the bound is -ceil(k/2))."""
        out = []
        for q in self.x:
            if q == 0:
                out.append(math.inf)
            else:
                out.append(_vq(q.numerator, self.p) - _vq(q.denominator, self.p))
        return out

    def x_elements(self, ring):
        return [ring(q) for q in self.x]

    def check_matrix_powers(self):
        """(x_k, x_{k-1}) p^k == (1, 0) A^k with A = [[a_p, p], [-1, 0]], integer-exact."""
        p, ap = self.p, self.ap
        row = (1, 0)
        bad = []
        for k in range(len(self.x)):
            lhs = (self.x[k] * p ** k, (self.x[k - 1] if k else 0) * p ** k)
            if lhs != (Fraction(row[0]), Fraction(row[1])):
                bad.append(k)
            row = (row[0] * ap - row[1], row[0] * p)
        return bad


def _vq(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def recurrence_tables(i_max, k_max, p=3, ap=3):
    if i_max < 2 or k_max < 2:
        raise ValueError("table bounds must be at least 2")
    b = [None, 1, ap]
    while len(b) <= i_max:
        b.append(ap * b[-1] - b[-2])
    x = [Fraction(1), Fraction(ap, p)]
    while len(x) <= k_max:
        x.append((ap * x[-1] - x[-2]) / p)
    return RecurrenceTables(ap, p, b[:i_max + 1], x[:k_max + 1])


def _x(ap, p, k):
    return recurrence_tables(2, max(k, 2), p, ap).x[k]


# ---------------------------------------------------------------------------
# the logarithm and its formal group

def f_poly(u, cap):
    """f_u(X) = (u + X)^p - u^p as a series over u's ring."""
    ring = u.ring
    p = ring.p
    coeffs = [ring.zero()]
    for i in range(1, cap):
        coeffs.append(u ** (p - i) * math.comb(p, i) if i <= p else ring.zero())
    return Series.from_coeffs(ring, coeffs, cap)


@dataclass
class HondaLog:
    series: Series
    terms: int
    tail_bound: object

    def floor(self):
        """Smallest coefficient valuation of log - X."""
        return (self.series - Series.var(self.series.ring, self.series.caps)).vfloor()


def honda_log(u, N=None, M=20):
    """sum_k x_k f_u^(k)(X) modulo (p^N, X^M), f^(k) = f^{phi^(k-1)} o ... o f."""
    ring = u.ring
    p = ring.p
    N = ring.N if N is None else N
    # terms reach the target only once v(f^(k)) is about 2N
    wring = ring.with_(N=log_working_prec(N, M))
    if u.prec is not None and u.prec < wring.N:
        raise PrecisionExhausted(f"unit known to p^{u.prec}, the logarithm needs p^{wring.N}")
    u = Element(wring, u.data, u.shift, u.prec if u.prec is not None else wring.N)
    X = Series.var(wring, (M,))
    total = X
    fk = X
    k = 0
    tail = None
    while True:
        k += 1
        fk = f_poly(u.frobenius(k - 1), M).compose(fk)
        xk = _x(ring.ap, p, k)
        term = fk * xk
        total = total + term
        vk = fk.vfloor()
        if p ** k >= M and vk >= 1:
            # later terms: v(f^(k+j)) >= vk + j and v(x_{k+j}) >= -ceil((k+j)/2)
            tail = vk + 1 - math.ceil((k + 1) / 2)
            if tail >= N:
                break
        if k > 4 * (N + M):
            raise PrecisionExhausted("logarithm terms do not decay")
    out = total.with_prec(N)
    return HondaLog(out, k, tail)


def log_working_prec(N, M):
    return 2 * N + 2 * M + 8


def _total_degree_mask(s, D):
    data = s.data.copy()
    for idx in np.ndindex(s.caps):
        if sum(idx) > D:
            data[idx] = 0
    return Series(s.ring, s.caps, data, s.shift, s.prec)


def _embed_var(f, nvars, i, D):
    """One-variable f placed in variable i of an nvars-variable ring with caps D+1."""
    caps = (D + 1,) * nvars
    data = np.zeros(caps + f.ring.shape, dtype=object)
    for j in range(min(D + 1, f.caps[0])):
        idx = [0] * nvars
        idx[i] = j
        data[tuple(idx)] = f.data[j]
    return Series(f.ring, caps, data, f.shift, f.prec)


@dataclass
class FormalGroup:
    F: Series                 # two-variable, coefficients of total degree <= D
    D: int
    log: HondaLog
    prec: int

    def coeff(self, i, j):
        return self.F[i, j]

    def substitute(self, A, B):
        """F(A, B) for series A, B of equal arity without constant term, masked to degree D."""
        D = self.D
        powA = [Series.one(A.ring, A.caps)]
        powB = [Series.one(B.ring, B.caps)]
        for _ in range(D):
            powA.append(_total_degree_mask(powA[-1] * A, D))
            powB.append(_total_degree_mask(powB[-1] * B, D))
        acc = Series.zero(A.ring, A.caps)
        for i in range(D + 1):
            for j in range(D + 1 - i):
                c = self.F[i, j]
                if not c.is_zero():
                    acc = acc + _total_degree_mask(powA[i] * powB[j], D) * c
        return acc


def formal_group(u, N=None, D=9):
    """F(X, Y) = l^{-1}(l(X) + l(Y)) to total degree D with integrality check."""
    ring = u.ring
    N = ring.N if N is None else N
    # series precision tracking is per-series, so Horner steps lose |vfloor| each
    work = N + 4 * D + 8
    lg = honda_log(u, work, D + 1)
    ell = lg.series
    inv = revert(ell)
    S = _embed_var(ell, 2, 0, D) + _embed_var(ell, 2, 1, D)
    F = _total_degree_mask(inv.compose(S), D)
    if F.prec is not None and F.prec < N:
        raise PrecisionExhausted(f"formal group only known to p^{F.prec}")
    F = F.with_prec(N)
    for idx in np.ndindex(F.caps):
        if sum(idx) <= D:
            c = F[idx]
            if not c.is_zero() and c.vfloor() < 0:
                raise IntegralityViolation(f"coefficient {idx} has valuation {c.valuation()}")
    return FormalGroup(F, D, lg, N)


def formal_group_axioms(G):
    """Dictionary of axiom checks for a FormalGroup (all to total degree D)."""
    D = G.D
    F = G.F
    ring = F.ring
    out = {}
    # F(X, 0) = X and F(0, Y) = Y
    out["unit_x"] = all(F[i, 0] == (1 if i == 1 else 0) for i in range(D + 1))
    out["unit_y"] = all(F[0, j] == (1 if j == 1 else 0) for j in range(D + 1))
    out["commutative"] = all(F[i, j] == F[j, i] for i in range(D + 1) for j in range(D + 1 - i))
    out["integral"] = all(F[i, j].is_zero() or F[i, j].vfloor() >= 0
                          for i in range(D + 1) for j in range(D + 1 - i))
    X3 = [Series.var(ring, (D + 1,) * 3, i) for i in range(3)]
    F2 = lambda A, B: G.substitute(A, B)
    lhs = F2(F2(X3[0], X3[1]), X3[2])
    rhs = F2(X3[0], F2(X3[1], X3[2]))
    out["associative"] = (lhs - rhs).with_prec(G.prec).is_zero()
    return out


# ---------------------------------------------------------------------------
# point logarithms and trace relations

def lambda_weights(ap, p, count, weights):
    """Exact rational weights w_1 .. w_count."""
    tab = recurrence_tables(count + 2, count + 2, p, ap)
    if weights == "definition":
        return [Fraction(tab.b[i] * p ** ((i + 1) // 2)) for i in range(1, count + 1)]
    if weights == "proof":
        return [Fraction(tab.b[i]) for i in range(1, count + 1)]
    if weights == "recurrence":
        return [tab.x[i - 1] * p ** i for i in range(1, count + 1)]
    raise ValueError(f"unknown weights {weights!r}")


def _weight_floor(ap, p, weights, i):
    if weights == "definition":
        return (i + 1) // 2
    if weights == "recurrence":
        return i - (i // 2)     # v(x_{i-1}) >= -ceil((i-1)/2)
    return 0


def lambda_nu(n, u, N=None, weights="definition"):
    """lambda_{n,u} = sum_i w_i u^{phi^-(n+i+1)}; raises NonConvergent for divergent weights."""
    ring = u.ring
    p, ap = ring.p, ring.ap
    N = ring.N if N is None else N
    count = 1
    while _weight_floor(ap, p, weights, count + 1) < N + 1:
        count += 1
        if count > 4 * N + 8:
            raise NonConvergent(f"weights {weights!r} do not decay p-adically")
    w = lambda_weights(ap, p, count, weights)
    period = p ** ring.m if ring.m else 1
    grouped = {}
    for i, wi in enumerate(w, start=1):
        r = (n + i + 1) % period
        grouped[r] = grouped.get(r, Fraction(0)) + wi
    total = ring.zero()
    for r in sorted(grouped):
        total = total + u.frobenius(-r) * grouped[r]
    return total.with_prec(N)


def point_log(n, u, N=None, weights="recurrence", twist="proof", ring=None):
    """log c_(n) for the unit u in the cyclotomic ring of level n over u's ring."""
    base = u.ring
    p = base.p
    N = base.N if N is None else N
    R = base.with_(n=n, N=N) if ring is None else ring
    lam = lambda_nu(n, u, N, weights).to_ring(R)
    total = lam
    for k in range(n):
        j = n - k
        xk = _x(base.ap, p, k)
        if twist == "proof":
            uk = u.frobenius(k - n)
        elif twist == "definition":
            uk = u
        else:
            raise ValueError(f"unknown twist {twist!r}")
        zj = R.zeta() ** (p ** (n - j)) - 1
        total = total + zj * uk.to_ring(R) * xk
    return total.with_prec(N)


@dataclass
class PointLogTable:
    values: dict            # n -> Element in the cyc(n) x unram(m) ring
    convention: dict
    prec: int


def point_log_table(n_max, m, u, N=None, weights="recurrence", twist="proof"):
    if u.ring.m != m:
        raise ValueError(f"unit lives in unram({u.ring.m}), not unram({m})")
    N = u.ring.N if N is None else N
    vals = {n: point_log(n, u, N, weights, twist) for n in range(n_max + 1)}
    return PointLogTable(vals, {"weights": weights, "twist": twist}, N)


def trace_compatible_units(p, ap, m_max, N):
    """d_0, ..., d_{m_max} with tr d_{m+1} = d_m, all units."""
    if m_max == 0:
        return [RingDescriptor(p, ap, N)(1)]
    top = RingDescriptor(p, ap, N, m=m_max)
    q = p ** (p ** m_max)
    t = teichmuller(top, [0, 1])
    for k in range(1, q - 1):
        if math.gcd(k, q - 1) != 1:
            continue
        d = [t ** k]
        ok = True
        for m in range(m_max - 1, -1, -1):
            nxt = d[0].trace(RingDescriptor(p, ap, N, m=m))
            if nxt.is_zero() or nxt.vfloor() > 0:
                ok = False
                break
            d.insert(0, nxt)
        if ok:
            return d
    raise ZeroResidue("no generator gives a unit trace system")


def verify_traces(p, ap, n_max=3, m_max=1, N=8, conventions=None):
    """Check both trace relations under each convention.

    Returns {"convention": <first fully passing convention or None>,
             "cases": [...], "conventions": {name: bool}}.
    """
    if conventions is None:
        conventions = [{"weights": w, "twist": t} for w in WEIGHTS for t in TWISTS]
    d = trace_compatible_units(p, ap, m_max, N)
    cases = []
    summary = {}
    for conv in conventions:
        key = f"{conv['weights']}/{conv['twist']}"
        ok_all = True
        logs = {}

        def log_at(n, m):
            if (n, m) not in logs:
                R = RingDescriptor(p, ap, N, n=n, m=m)
                logs[n, m] = point_log(n, d[m], N, conv["weights"], conv["twist"], R)
            return logs[n, m]

        for m in range(m_max + 1):
            for n in range(2, n_max + 1):
                try:
                    lhs = log_at(n, m).trace(RingDescriptor(p, ap, N, n=n - 1, m=m))
                    rhs = log_at(n - 1, m) * ap - log_at(n - 2, m).to_ring(lhs.ring)
                    disc = _disc_valuation(lhs - rhs, N)
                    passed = disc >= N
                except NonConvergent:
                    disc, passed = None, False
                ok_all &= passed
                cases.append({"convention": key, "n": n, "m": m, "relation": "cyclotomic",
                              "pass": passed, "discrepancyValuation": _fmt(disc)})
        for m in range(m_max):
            for n in range(0, n_max + 1):
                try:
                    lhs = log_at(n, m + 1).trace(RingDescriptor(p, ap, N, n=n, m=m))
                    disc = _disc_valuation(lhs - log_at(n, m), N)
                    passed = disc >= N
                except NonConvergent:
                    disc, passed = None, False
                ok_all &= passed
                cases.append({"convention": key, "n": n, "m": m, "relation": "unramified",
                              "pass": passed, "discrepancyValuation": _fmt(disc)})
        summary[key] = ok_all
    chosen = next((c for c in conventions if summary[f"{c['weights']}/{c['twist']}"]), None)
    return {"convention": chosen, "conventions": summary, "cases": cases}


def _disc_valuation(x, N):
    if x.with_prec(N).is_zero():
        return math.inf
    return x.valuation()


def _fmt(v):
    if v is None:
        return None
    if v == math.inf:
        return "inf"
    return str(v)
