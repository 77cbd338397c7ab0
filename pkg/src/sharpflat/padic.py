"""Precision-tracked arithmetic in Z_p and its quadratic, unramified and
cyclotomic extensions.

A ring is a tensor product of up to three monogenic factors, always stored
in the axis order (cyclotomic, unramified, quadratic):

* cyclotomic level n: Z_p[z] / Phi_{p^n}(z), rank phi(p^n)
* unramified level m: Z_p[w] / P_m(w), rank p^m, P_m a fixed lift of a
  primitive irreducible polynomial over F_p
* quadratic: Z_p[a] / (a^2 - a_p a + p), the Hecke polynomial

An element is ``data / p^shift`` with integer coordinates in the power
basis, known modulo ``p^prec`` times the integral lattice.  ``prec=None``
marks an exact value.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math
import warnings

import numpy as np

from . import _kernel as K
from ._linalg import echelon
from .errors import (DescriptorMismatch, DivisionByZeroAtPrecision,
                     IndistinguishableFromZero, NonPrimitiveCharacterWarning,
                     NotASubring, UnsupportedRing, ZeroResidue)

__all__ = ["RingDescriptor", "Element", "PadicNumber", "teichmuller",
           "gauss_sum", "character_value", "unramified_poly"]


# ---------------------------------------------------------------------------
# polynomials over F_p (coefficient lists, low degree first)

def _fp_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _fp_mod(out, f, p)


def _fp_mod(a, f, p):
    a = list(a)
    d = len(f) - 1
    inv = pow(f[-1], -1, p)
    for k in range(len(a) - 1, d - 1, -1):
        c = a[k] * inv % p
        if c:
            for j in range(d + 1):
                a[k - d + j] = (a[k - d + j] - c * f[j]) % p
    return _fp_trim(a[:d] if len(a) > d else a)


def _fp_powmod(a, e, f, p):
    result = [1]
    base = _fp_mod(a, f, p)
    while e:
        if e & 1:
            result = _fp_mulmod(result, base, f, p)
        base = _fp_mulmod(base, base, f, p)
        e >>= 1
    return result


def _fp_gcd(a, b, p):
    a, b = _fp_trim(list(a)), _fp_trim(list(b))
    while b:
        a, b = b, _fp_mod(a, b, p)
    return a


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _fp_is_primitive_irreducible(f, p):
    d = len(f) - 1
    x = [0, 1]
    # Rabin: x^(p^d) == x mod f and gcd(x^(p^(d/r)) - x, f) == 1 for primes r | d
    if _fp_powmod(x, p ** d, f, p) != x:
        return False
    for r in _prime_factors(d):
        h = _fp_powmod(x, p ** (d // r), f, p)
        h = h + [0] * (2 - len(h))
        h[1] = (h[1] - 1) % p
        if len(_fp_gcd(f, _fp_trim(h), p)) > 1:
            return False
    q1 = p ** d - 1
    for r in _prime_factors(q1):
        if _fp_powmod(x, q1 // r, f, p) == [1]:
            return False
    return True


@lru_cache(maxsize=None)
def unramified_poly(p, m):
    """Defining polynomial of the unramified ring of level m (degree p^m).

    The first monic polynomial, in order of the base-p integer formed by its
    lower coefficients, that is irreducible and primitive over F_p.
    Coefficients are taken in [0, p) and used unchanged as the integer lift.
    """
    d = p ** m
    for code in range(1, p ** d):
        low = [(code // p ** i) % p for i in range(d)]
        if low[0] == 0:
            continue
        f = low + [1]
        if _fp_is_primitive_irreducible(f, p):
            return tuple(f)
    raise RuntimeError("no primitive polynomial found")


@lru_cache(maxsize=None)
def cyclotomic_coeffs(p, n):
    """Phi_{p^n}(z) as integer coefficients, low degree first."""
    if n == 0:
        return (-1, 1)
    step = p ** (n - 1)
    out = [0] * (step * (p - 1) + 1)
    for i in range(p):
        out[i * step] = 1
    return tuple(out)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingDescriptor:
    """Coefficient ring: prime, trace coefficient a_p, precision and factors.

    ``n`` is the cyclotomic level, ``m`` the unramified level and ``quad``
    selects the quadratic factor.  ``N`` is the default absolute precision.
    """
    p: int
    ap: int
    N: int = 20
    n: int = 0
    m: int = 0
    quad: bool = False

    def __post_init__(self):
        if self.p < 3 or any(self.p % d == 0 for d in range(2, int(self.p ** 0.5) + 1)):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.ap % self.p:
            raise ValueError(f"p={self.p} must divide a_p={self.ap}")
        if self.N < 1:
            raise ValueError("precision N must be >= 1")
        if int(self.N) != self.N:
            raise ValueError(f"precision N must be an integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if self.n < 0 or self.m < 0:
            raise ValueError("levels must be >= 0")

    # -- structure ---------------------------------------------------------
    @property
    def kind(self):
        parts = [self.n > 0, self.m > 0, self.quad]
        if sum(parts) == 0:
            return "base"
        if sum(parts) > 1:
            return "composite"
        return "cyc" if self.n else ("unram" if self.m else "quad")

    @property
    def axes(self):
        out = []
        if self.n:
            out.append(("cyc", cyclotomic_coeffs(self.p, self.n)))
        if self.m:
            out.append(("unram", unramified_poly(self.p, self.m)))
        if self.quad:
            out.append(("quad", (self.p, -self.ap, 1)))
        return out

    @property
    def shape(self):
        return tuple(len(poly) - 1 for _, poly in self.axes) or (1,)

    @property
    def rank(self):
        return int(np.prod(self.shape))

    def axis(self, name):
        for i, (nm, _) in enumerate(self.axes):
            if nm == name:
                return i
        return None

    @property
    def residue_degree(self):
        return self.p ** self.m if self.m else 1

    def with_(self, **kw):
        d = dict(p=self.p, ap=self.ap, N=self.N, n=self.n, m=self.m, quad=self.quad)
        d.update(kw)
        return RingDescriptor(**d)

    def join(self, other):
        if (self.p, self.ap) != (other.p, other.ap):
            raise DescriptorMismatch(f"{self} vs {other}")
        if self.m and other.m and self.m != other.m:
            m = max(self.m, other.m)
        else:
            m = max(self.m, other.m)
        return self.with_(N=min(self.N, other.N), n=max(self.n, other.n), m=m,
                          quad=self.quad or other.quad)

    def contains(self, other):
        return ((self.p, self.ap) == (other.p, other.ap) and other.n <= self.n
                and other.m <= self.m and (self.quad or not other.quad))

    def header(self):
        return {"p": self.p, "ap": self.ap, "kind": self.kind, "n": self.n,
                "m": self.m, "quad": self.quad, "N": self.N}

    @classmethod
    def from_header(cls, h):
        return cls(p=h["p"], ap=h["ap"], N=h["N"], n=h.get("n", 0), m=h.get("m", 0),
                   quad=h.get("quad", h.get("kind") == "quad"))

    # -- constructors ------------------------------------------------------
    def __call__(self, value, prec=None):
        return Element.from_value(self, value, prec)

    def zero(self):
        return Element(self, K.zeros(self.shape), 0, None)

    def one(self):
        return self(1)

    def basis(self, index):
        data = K.zeros(self.shape)
        data[index] = 1
        return Element(self, data, 0, None)

    def gen(self, name):
        ax = self.axis(name)
        if ax is None:
            raise UnsupportedRing(f"{self.kind} ring has no {name} factor")
        idx = [0] * len(self.shape)
        idx[ax] = 1
        return self.basis(tuple(idx))

    def alpha(self):
        return self.gen("quad")

    def beta(self):
        return self(self.ap) - self.alpha()

    def zeta(self):
        """Canonical generator zeta_{p^n} of the cyclotomic factor."""
        return self.gen("cyc")

    def w(self):
        return self.gen("unram")


# ---------------------------------------------------------------------------
# multiplication kernel on raw coordinate arrays

def _ring_reduce(raw, ring, lead=0):
    for i, (_, poly) in enumerate(ring.axes):
        raw = K.reduce_axis(raw, lead + i, poly)
    if not ring.axes:
        raw = raw[(slice(None),) * lead + (slice(0, 1),)]
    return raw


def _signed_convolve(a, b):
    full = tuple(x + y - 1 for x, y in zip(a.shape, b.shape))
    out = K.zeros(full)
    for idx in np.ndindex(a.shape):
        c = a[idx]
        if c:
            sl = tuple(slice(i, i + s) for i, s in zip(idx, b.shape))
            out[sl] += c * b
    return out


def ring_mul_raw(a, b, ring):
    """Product of two coordinate arrays of `ring` (no reduction mod p)."""
    return _ring_reduce(_signed_convolve(a, b), ring)


@lru_cache(maxsize=None)
def _zeta_power_table(p, n):
    """Coordinates of z^k, 0 <= k < p^n, in Z[z]/Phi_{p^n}."""
    poly = cyclotomic_coeffs(p, n)
    d = len(poly) - 1
    rows = []
    for k in range(p ** n):
        v = K.zeros((k + 1,))
        v[k] = 1
        v = K.reduce_axis(v, 0, poly) if k >= d else K.pad_to(v, (d,))
        rows.append(tuple(int(x) for x in v))
    return tuple(rows)


def _apply_axis_matrix(data, axis, S):
    """Replace basis vector i of `axis` by row i of S."""
    S = np.asarray(S, dtype=object)
    moved = np.moveaxis(data, axis, -1)
    out = moved.dot(S)
    return np.moveaxis(out, -1, axis)


@lru_cache(maxsize=None)
def _frobenius_image(p, m, prec):
    """Coordinates of sigma(w) modulo p^prec, where sigma lifts y -> y^p."""
    ring = RingDescriptor(p, p, prec, 0, m, False)
    poly = unramified_poly(p, m)
    w = ring.w().with_prec(prec)
    r = w ** p
    dpoly = [i * c for i, c in enumerate(poly)][1:]
    for _ in range(2 * prec.bit_length() + 4):
        val = _poly_eval(poly, r)
        if val.is_zero():
            break
        r = (r - val / _poly_eval(dpoly, r)).with_prec(prec)
    return tuple(int(x) for x in (r.data * 1).flat), r.shift


def _poly_eval(coeffs, x):
    acc = x.ring.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=None)
def _frobenius_matrix(p, m, prec):
    ring = RingDescriptor(p, p, prec, 0, m, False)
    flat, shift = _frobenius_image(p, m, prec)
    assert shift == 0
    sw = Element(ring, np.array(flat, dtype=object).reshape(ring.shape), 0, prec)
    rows, cur = [], ring.one().with_prec(prec)
    for _ in range(ring.shape[0]):
        rows.append([int(x) for x in cur.data.flat])
        cur = (cur * sw).with_prec(prec)
    return tuple(tuple(r) for r in rows)


# ---------------------------------------------------------------------------

class Element:
    """Element of a ring described by a RingDescriptor."""

    __slots__ = ("ring", "data", "shift", "prec")

    def __init__(self, ring, data, shift=0, prec=None):
        p = ring.p
        data = np.asarray(data, dtype=object).reshape(ring.shape)
        if prec is None:
            data = data.copy()
        else:
            e = prec + shift
            if e <= 0:
                data = K.zeros(ring.shape)
                shift = max(0, -prec)
            else:
                data = data % p ** e
        if any(data.flat):
            while shift > 0 and all(int(x) % p == 0 for x in data.flat):
                data = data // p
                shift -= 1
        elif prec is None:
            shift = 0
        else:
            shift = max(0, -prec)
        self.ring = ring
        self.data = data
        self.shift = shift
        self.prec = prec

    # -- construction ------------------------------------------------------
    @classmethod
    def from_value(cls, ring, value, prec=None):
        if isinstance(value, Element):
            return value.to_ring(ring) if prec is None else value.to_ring(ring).with_prec(prec)
        value = Fraction(value)
        p = ring.p
        num, den = value.numerator, value.denominator
        s = 0
        while den % p == 0:
            den //= p
            s += 1
        data = K.zeros(ring.shape)
        if den == 1:
            data.flat[0] = num
            return cls(ring, data, s, prec)
        work = (prec if prec is not None else ring.N) + s
        data.flat[0] = num * pow(den, -1, p ** max(work, 1))
        return cls(ring, data, s, prec if prec is not None else ring.N)

    def with_prec(self, prec):
        """Same value, absolute precision lowered to `prec` (never raised)."""
        if prec is None:
            return self
        if self.prec is not None:
            prec = min(prec, self.prec)
        return Element(self.ring, self.data, self.shift, prec)

    def to_ring(self, target):
        """Embed into a ring containing this one."""
        src = self.ring
        if target == src:
            return self
        if not target.contains(src):
            raise DescriptorMismatch(f"cannot embed {src.kind} into {target}")
        data = _full3(self.data, src)
        p = src.p
        if src.n != target.n:
            d_t = len(cyclotomic_coeffs(p, target.n)) - 1
            out = K.zeros((d_t,) + data.shape[1:])
            step = p ** (target.n - src.n) if src.n else 1
            for i in range(data.shape[0]):
                out[i * step] = data[i]
            data = out
        prec = self.prec
        if src.m != target.m:
            if src.m == 0:
                data = K.pad_to(data, (data.shape[0], p ** target.m, data.shape[2]))
            else:
                S = _unram_embedding(p, src.m, target.m, _work_prec(self, target))
                data = _apply_axis_matrix(data, 1, S)
                if prec is None:
                    prec = target.N
        if src.quad != target.quad:
            data = K.pad_to(data, data.shape[:2] + (2,))
        return Element(target, data.reshape(target.shape), self.shift, prec)

    # -- inspection --------------------------------------------------------
    @property
    def p(self):
        return self.ring.p

    def coords(self):
        """Coordinates as Fractions (exact representative)."""
        sc = Fraction(1, self.p ** self.shift)
        return [Fraction(int(x)) * sc for x in self.data.flat]

    def is_zero(self):
        return not any(self.data.flat)

    def is_exact_zero(self):
        return self.prec is None and self.is_zero()

    def vfloor(self):
        """Integer lower bound on the valuation read off the coordinates."""
        v = K.vp_array(self.data, self.p)
        if v is None:
            return math.inf if self.prec is None else self.prec
        return v - self.shift

    def valuation(self):
        """Valuation normalised by v(p) = 1, as a Fraction."""
        if self.is_zero():
            if self.prec is None:
                return math.inf
            raise IndistinguishableFromZero(self.prec)
        ring = self.ring
        p = self.p
        if ring.n and ring.quad:
            raise UnsupportedRing("valuation is not defined on cyclotomic x quadratic rings "
                                  "(not a domain)")
        data = self.data
        if ring.n:
            e = len(cyclotomic_coeffs(p, ring.n)) - 1
            data = _apply_axis_matrix(data, 0, _to_pi_basis(p, ring.n))
            best = None
            for k in range(e):
                v = K.vp_array(data[k], p)
                if v is not None:
                    cand = Fraction(v) + Fraction(k, e)
                    best = cand if best is None or cand < best else best
            return best - self.shift
        if ring.quad:
            best = None
            for k in range(2):
                v = K.vp_array(data[..., k], p)
                if v is not None:
                    cand = Fraction(v) + Fraction(k, 2)
                    best = cand if best is None or cand < best else best
            return best - self.shift
        return Fraction(K.vp_array(data, p) - self.shift)

    def unit_part(self):
        """Integer mantissa of a base-ring element (p-adic unit modulo p^(prec - v))."""
        if self.ring.rank != 1:
            raise UnsupportedRing("mantissa only defined for scalars in Z_p")
        x = int(self.data.flat[0])
        if x == 0:
            return 0
        return x // self.p ** K.vp(x, self.p)

    def __repr__(self):
        c = self.coords()
        body = c[0] if len(c) == 1 else c
        pr = "exact" if self.prec is None else f"O(p^{self.prec})"
        return f"Element({self.ring.kind}, {body}, {pr})"

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Element):
            if other.ring == self.ring:
                return self, other
            if (other.ring.p, other.ring.ap) != (self.ring.p, self.ring.ap):
                raise DescriptorMismatch(f"{self.ring} vs {other.ring}")
            joint = self.ring.join(other.ring)
            if self.ring.N != other.ring.N:
                joint = joint.with_(N=min(self.ring.N, other.ring.N))
            return self.to_ring(joint), other.to_ring(joint)
        if isinstance(other, (int, Fraction)):
            return self, Element.from_value(self.ring, other)
        return NotImplemented, NotImplemented

    def __add__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        s = max(a.shift, b.shift)
        p = a.p
        data = a.data * p ** (s - a.shift) + b.data * p ** (s - b.shift)
        return Element(a.ring, data, s, _pmin(a.prec, b.prec))

    __radd__ = __add__

    def __neg__(self):
        return Element(self.ring, -self.data, self.shift, self.prec)

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        prec = _pmin(_padd(a.prec, b.vfloor()), _padd(b.prec, a.vfloor()))
        data = ring_mul_raw(a.data, b.data, a.ring)
        return Element(a.ring, data, a.shift + b.shift, prec)

    __rmul__ = __mul__

    def inverse(self):
        return _inverse(self)

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        binv = b.inverse()
        if a.prec is None and b.prec is None:
            return (a * binv).with_prec(binv.prec)
        vi = binv.vfloor()
        prec = _pmin(_padd(a.prec, vi), _padd(_padd(b.prec, 2 * vi), a.vfloor()))
        return (a * binv).with_prec(prec)

    def __rtruediv__(self, other):
        return Element.from_value(self.ring, other) / self

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = Element.from_value(self.ring, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) or isinstance(other, Element):
            try:
                return (self - other).is_zero()
            except DescriptorMismatch:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, tuple(self.coords())))

    # -- Galois action -----------------------------------------------------
    def frobenius(self, k=1):
        """Apply the Frobenius lift k times (acts on the unramified factor only)."""
        ring = self.ring
        if not ring.m:
            if ring.n or ring.quad:
                raise UnsupportedRing("frobenius needs an unramified factor")
            return self
        deg = ring.p ** ring.m
        k %= deg
        if k == 0:
            return self
        prec = self.prec if self.prec is not None else ring.N
        work = prec + self.shift
        S = _frobenius_matrix(ring.p, ring.m, max(work, 1))
        ax = ring.axis("unram")
        data = self.data
        for _ in range(k):
            data = _apply_axis_matrix(data, ax, S) % ring.p ** max(work, 1)
        return Element(ring, data, self.shift, prec)

    def conjugates(self, target):
        """Images under Gal(ring / target), one per group element."""
        ring = self.ring
        if not ring.contains(target) or target.quad != ring.quad:
            raise NotASubring(f"{target} is not a subring of {ring} along cyc/unram")
        out = [self]
        if target.n < ring.n:
            out = [y for x in out for y in x._cyc_conjugates(target.n)]
        if target.m < ring.m:
            step = ring.p ** target.m
            count = ring.p ** (ring.m - target.m)
            out = [x.frobenius(j * step) for x in out for j in range(count)]
        return out

    def _cyc_conjugates(self, n_low):
        ring = self.ring
        p, n = ring.p, ring.n
        pn = p ** n
        table = _zeta_power_table(p, n)
        if n_low == 0:
            auts = [a for a in range(1, pn) if a % p]
        else:
            auts = [1 + j * p ** n_low for j in range(p ** (n - n_low))]
        out = []
        for a in auts:
            S = [table[(a * i) % pn] for i in range(len(table[0]))]
            data = _apply_axis_matrix(self.data, 0, S)
            out.append(Element(ring, data, self.shift, self.prec))
        return out

    def trace(self, target):
        conj = self.conjugates(target)
        total = conj[0]
        for c in conj[1:]:
            total = total + c
        return total.restrict(target)

    def norm(self, target):
        conj = self.conjugates(target)
        total = conj[0]
        for c in conj[1:]:
            total = total * c
        return total.restrict(target)

    def restrict(self, target):
        """Express a value lying in a subring in that subring's coordinates."""
        ring = self.ring
        if target == ring:
            return self
        if not ring.contains(target):
            raise NotASubring(f"{target} is not a subring of {ring}")
        p = ring.p
        data = _full3(self.data, ring)
        rest = []
        if target.n < ring.n:
            step = p ** (ring.n - target.n) if target.n else data.shape[0] + 1
            keep = list(range(0, data.shape[0], step)) if target.n else [0]
            rest += [data[i] for i in range(data.shape[0]) if i not in keep]
            data = data[keep]
        if target.quad != ring.quad:
            rest.append(data[..., 1])
            data = data[..., :1]
        if target.m < ring.m:
            if target.m:
                data = _restrict_unram(self, data, 1, target)
            else:
                rest.append(data[:, 1:])
                data = data[:, :1]
        if any(int(x) for r in rest for x in np.asarray(r).flat):
            raise NotASubring("value does not lie in the target subring at this precision")
        return Element(target, np.asarray(data, dtype=object).reshape(target.shape),
                       self.shift, self.prec)


PadicNumber = Element


def _pmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _padd(a, b):
    if a is None or b == math.inf:
        return None
    return a + b


def _full3(data, ring):
    """View coordinates with explicit (cyc, unram, quad) axes."""
    shape = (len(cyclotomic_coeffs(ring.p, ring.n)) - 1 if ring.n else 1,
             ring.p ** ring.m if ring.m else 1, 2 if ring.quad else 1)
    return np.asarray(data, dtype=object).reshape(shape)


def _work_prec(x, target):
    return (x.prec if x.prec is not None else target.N) + x.shift + 2


@lru_cache(maxsize=None)
def _to_pi_basis(p, n):
    """Rows: coordinates of z^i in the basis (z - 1)^k."""
    d = len(cyclotomic_coeffs(p, n)) - 1
    return tuple(tuple(math.comb(i, k) for k in range(d)) for i in range(d))


def _mult_matrix(b):
    ring = b.ring
    cols = []
    for idx in np.ndindex(ring.shape):
        e = K.zeros(ring.shape)
        e[idx] = 1
        cols.append([int(x) for x in ring_mul_raw(b.data, e, ring).flat])
    return np.array(cols, dtype=object).T


def _inverse(b):
    ring = b.ring
    p = ring.p
    if b.is_zero():
        raise DivisionByZeroAtPrecision(f"divisor is zero modulo p^{b.prec}")
    base_prec = b.prec if b.prec is not None else ring.N
    if ring.rank == 1:
        x = int(b.data.flat[0])
        v = K.vp(x, p)
        u = x // p ** v
        work = max(base_prec + b.shift, 1) + 2 * v + 2
        inv = pow(u, -1, p ** work)
        vi = b.shift - v
        prec = base_prec - 2 * (v - b.shift) if b.prec is not None else ring.N
        data = K.zeros(ring.shape)
        if vi >= 0:
            data.flat[0] = inv * p ** vi
            return Element(ring, data, 0, prec)
        data.flat[0] = inv
        return Element(ring, data, -vi, prec)
    A = _mult_matrix(b)
    rhs = K.zeros((ring.rank, 1))
    rhs[0, 0] = 1
    Kp = max(base_prec + b.shift, 1)
    ech = echelon(A, rhs, p, Kp)
    if ech.rank < ring.rank:
        raise DivisionByZeroAtPrecision("divisor is not invertible at this precision")
    E = max(ech.pivots)
    Kp2 = Kp + 2 * E + 2
    ech = echelon(A, rhs, p, Kp2)
    Y, E = ech.back_substitute(0)
    # b^-1 = p^shift * data^-1 = p^shift * Y / p^E
    vi = min((K.vp(y, p) for y in Y if y), default=0) + b.shift - E
    if b.prec is None:
        prec = ring.N
    else:
        prec = base_prec + 2 * vi
    shift = E - b.shift
    data = np.array(Y, dtype=object).reshape(ring.shape)
    if shift < 0:
        data = data * p ** (-shift)
        shift = 0
    return Element(ring, data, shift, prec)


@lru_cache(maxsize=None)
def _unram_embedding(p, m_low, m_high, prec):
    """Rows: coordinates in level m_high of the powers of the level-m_low generator."""
    hi = RingDescriptor(p, p, prec, 0, m_high, False)
    poly_low = unramified_poly(p, m_low)
    poly_high = unramified_poly(p, m_high)
    q_hi, q_lo = p ** (p ** m_high), p ** (p ** m_low)
    step = (q_hi - 1) // (q_lo - 1)
    root = None
    for k in range(q_lo - 1):
        cand = _fp_powmod([0, 1], step * k, list(poly_high), p)
        acc = []
        for c in reversed(poly_low):
            acc = _fp_mod([(x) for x in _fp_mulmod(acc, cand, list(poly_high), p)] if acc else [], list(poly_high), p)
            acc = acc + [0] * max(0, 1 - len(acc))
            acc[0] = (acc[0] + c) % p
            acc = _fp_trim(acc)
        if not acc:
            root = cand
            break
    if root is None:
        raise RuntimeError("no residue root for subfield embedding")
    data = K.zeros(hi.shape)
    for i, c in enumerate(root):
        data[i] = c
    r = Element(hi, data, 0, prec)
    dpoly = [i * c for i, c in enumerate(poly_low)][1:]
    for _ in range(2 * prec.bit_length() + 4):
        val = _poly_eval(poly_low, r)
        if val.is_zero():
            break
        r = (r - val / _poly_eval(dpoly, r)).with_prec(prec)
    rows, cur = [], hi.one().with_prec(prec)
    for _ in range(len(poly_low) - 1):
        rows.append(tuple(int(x) for x in cur.data.flat))
        cur = (cur * r).with_prec(prec)
    return tuple(rows)


def _restrict_unram(x, sub, ax, target):
    ring = x.ring
    p = ring.p
    prec = (x.prec if x.prec is not None else ring.N) + x.shift
    S = np.array(_unram_embedding(p, target.m, ring.m, prec + 2), dtype=object)
    moved = np.moveaxis(sub, ax, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    out = []
    for row in flat:
        ech = echelon(S.T, np.array(row, dtype=object).reshape(-1, 1), p, prec)
        if ech.integral_obstruction(0):
            raise NotASubring("value does not lie in the target unramified subring")
        y, E = ech.back_substitute(0)
        out.append([v // p ** E if E else v for v in y])
    res = np.array(out, dtype=object).reshape(moved.shape[:-1] + (S.shape[0],))
    return np.moveaxis(res, -1, ax)


# ---------------------------------------------------------------------------

def teichmuller(ring, residue):
    """Teichmuller lift of a nonzero residue class to precision ring.N.

    `residue` is an int (residue field F_p) or a sequence of ints giving the
    class as a polynomial in the unramified generator.  Computed by Newton
    iteration on x^(q-1) = 1.
    """
    p = ring.p
    if isinstance(residue, int):
        residue = [residue]
    residue = [int(c) % p for c in residue]
    if not any(residue):
        raise ZeroResidue("residue must be nonzero")
    q = p ** ring.residue_degree
    if len(residue) > 1 and not ring.m:
        raise UnsupportedRing("residue in an extension field needs an unramified factor")
    work = ring.N + 2
    t = ring.zero()
    for i, c in enumerate(residue):
        if c:
            t = t + (ring.w() ** i if i else ring.one()) * c
    t = t.with_prec(work)
    for _ in range(work.bit_length() + 3):
        u = t ** (q - 1)
        if (u - 1).is_zero():
            break
        t = (t - t * (u - 1) / (u * (q - 1))).with_prec(work)
    return t.with_prec(ring.N)


def character_value(ring, a, level, e, t):
    """chi(a) for the character of (Z/p^(level+1))^x sending 1+p to
    zeta_{p^level}^e and restricting to the Teichmuller character to the power t.

    `ring` must contain the cyclotomic level `level + 1`.
    """
    p = ring.p
    modn = p ** (level + 1)
    a %= modn
    if a % p == 0:
        return ring.zero()
    omega_sign = None
    if (2 * t) % (p - 1) == 0:
        omega_sign = pow(a, t % (p - 1), p)
        omega = ring(1 if omega_sign == 1 else -1)
    else:
        work = ring.N + 1
        om = pow(a, p ** (work - 1), p ** work)
        omega = ring(pow(om, t % (p - 1), p ** work), prec=ring.N)
    omega_mod = pow(a, p ** level, modn)
    unit1 = a * pow(omega_mod, -1, modn) % modn
    g, k = 1, 0
    while g != unit1:
        g = g * (1 + p) % modn
        k += 1
        if k > p ** level:
            raise RuntimeError("discrete log failed")
    exp_z = (e * k * p) % modn if level >= 0 else 0
    zpow = ring.zeta() ** exp_z if exp_z else ring.one()
    return omega * zpow


def gauss_sum(ring, level, e=0, t=0):
    """Gauss sum of the character (level, e, t) against zeta_{p^(level+1)}.

    The result lives in the cyclotomic ring of level `level + 1`; `ring`
    supplies p, a_p and precision and is widened as needed.
    """
    p = ring.p
    R = ring.with_(n=max(ring.n, level + 1))
    primitive = (e % p != 0) if level >= 1 else (t % (p - 1) != 0)
    if not primitive:
        warnings.warn(f"character (level={level}, e={e}, t={t}) is not primitive; "
                      "its Gauss sum may vanish", NonPrimitiveCharacterWarning, stacklevel=2)
    step = p ** (R.n - level - 1)
    z = R.zeta()
    total = R.zero()
    for a in range(1, p ** (level + 1)):
        if a % p == 0:
            continue
        total = total + character_value(R, a, level, e, t) * z ** (a * step)
    return total
