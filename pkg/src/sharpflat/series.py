"""Truncated power series in one or two variables, finite-level group rings
and 2x2 matrices over them.

A series stores integer coordinates of shape ``caps + ring.shape`` together
with a common denominator ``p^shift`` and an absolute precision, exactly as
:class:`~sharpflat.padic.Element` does for a single coefficient.  Variables
are named X (first axis) and Y (second axis).
"""

from fractions import Fraction
import math
import warnings

import numpy as np

from . import _kernel as K
from .padic import Element, RingDescriptor, _padd, _pmin, _ring_reduce, _apply_axis_matrix
from .errors import (CapMismatch, CapTooSmallWarning, DescriptorMismatch, LevelZero,
                     NotInDisk, NotReversible, ZeroAtPrecision)

__all__ = ["Series", "TruncSeries1", "TruncSeries2", "GroupRingElement", "Mat2",
           "cyclotomic_poly", "omega", "eval_at", "reduce_to_level", "project_pi",
           "lift_nu", "eval_character", "revert"]

VARS = ("X", "Y")


def _scalar(ring, c):
    if isinstance(c, Element):
        return c.to_ring(ring) if c.ring != ring else c
    return Element.from_value(ring, c)


class Series:
    """Power series truncated modulo X^M (and Y^M_Y for two variables)."""

    __slots__ = ("ring", "caps", "data", "shift", "prec")

    def __init__(self, ring, caps, data, shift=0, prec=None):
        caps = tuple(int(c) for c in caps)
        data = np.asarray(data, dtype=object).reshape(caps + ring.shape)
        self.data, self.shift = K.normalize(data, shift, prec, ring.p)
        self.ring = ring
        self.caps = caps
        self.prec = prec

    # -- construction ------------------------------------------------------
    @classmethod
    def zero(cls, ring, caps):
        caps = (caps,) if isinstance(caps, int) else tuple(caps)
        return cls(ring, caps, K.zeros(caps + ring.shape))

    @classmethod
    def constant(cls, ring, caps, c):
        caps = (caps,) if isinstance(caps, int) else tuple(caps)
        return cls.zero(ring, caps) + _scalar(ring, c)

    @classmethod
    def one(cls, ring, caps):
        return cls.constant(ring, caps, 1)

    @classmethod
    def var(cls, ring, caps, i=0):
        caps = (caps,) if isinstance(caps, int) else tuple(caps)
        data = K.zeros(caps + ring.shape)
        idx = [0] * len(caps)
        if caps[i] > 1:
            idx[i] = 1
            data[tuple(idx) + (0,) * len(ring.shape)] = 1
        return cls(ring, caps, data)

    @classmethod
    def from_coeffs(cls, ring, coeffs, caps=None, prec=None):
        """Build from a (nested) list of scalars or Elements, low degree first."""
        flat = list(_flatten(coeffs))
        shape = _nested_shape(coeffs)
        if caps is None:
            caps = shape
        caps = (caps,) if isinstance(caps, int) else tuple(caps)
        elems = [_scalar(ring, c) for c in flat]
        s = max((e.shift for e in elems), default=0)
        p = ring.p
        data = K.zeros(caps + ring.shape)
        pr = prec
        for idx, e in zip(np.ndindex(shape), elems):
            if all(i < c for i, c in zip(idx, caps)):
                data[idx] = e.data * p ** (s - e.shift)
                pr = _pmin(pr, e.prec)
        return cls(ring, caps, data, s, pr)

    # -- basic access ------------------------------------------------------
    @property
    def p(self):
        return self.ring.p

    @property
    def nvars(self):
        return len(self.caps)

    @property
    def vars(self):
        return list(VARS[:self.nvars])

    def __getitem__(self, idx):
        if isinstance(idx, int):
            idx = (idx,)
        if any(i >= c for i, c in zip(idx, self.caps)):
            raise IndexError("coefficient beyond the truncation cap")
        return Element(self.ring, self.data[idx], self.shift, self.prec)

    def coeffs(self):
        """All coefficients as Elements, row-major."""
        return [self[idx] for idx in np.ndindex(self.caps)]

    def coeff_rows(self):
        if self.nvars == 1:
            return [self[j] for j in range(self.caps[0])]
        return [[self[i, j] for j in range(self.caps[1])] for i in range(self.caps[0])]

    def is_zero(self):
        return not any(self.data.flat)

    def vfloor(self):
        v = K.vp_array(self.data, self.p)
        if v is None:
            return math.inf if self.prec is None else self.prec
        return v - self.shift

    def coeff_vfloor(self, idx):
        """Integer lower bound on the valuation of one coefficient."""
        v = K.vp_array(self.data[idx], self.p)
        if v is None:
            return math.inf if self.prec is None else self.prec
        return v - self.shift

    def order(self, var=0):
        """Smallest degree in `var` carrying a nonzero coefficient (None if zero)."""
        moved = np.moveaxis(self.data, var, 0)
        for k in range(moved.shape[0]):
            if any(moved[k].flat):
                return k
        return None

    def degree(self):
        nz = [i for i in range(self.caps[0]) if any(np.asarray(self.data[i]).flat)]
        return max(nz) if nz else -1

    def __repr__(self):
        pr = "exact" if self.prec is None else f"O(p^{self.prec})"
        head = [str(c.coords()[0] if self.ring.rank == 1 else c.coords())
                for c in self.coeffs()[:8]]
        return f"Series({self.vars}, caps={self.caps}, [{', '.join(head)}...], {pr})"

    # -- precision and shape -------------------------------------------------
    def with_prec(self, prec):
        if prec is None:
            return self
        if self.prec is not None:
            prec = min(prec, self.prec)
        return Series(self.ring, self.caps, self.data, self.shift, prec)

    def truncate(self, caps):
        caps = (caps,) if isinstance(caps, int) else tuple(caps)
        if len(caps) != self.nvars:
            raise CapMismatch("truncate needs one cap per variable")
        caps = tuple(min(c, s) for c, s in zip(caps, self.caps))
        sl = tuple(slice(0, c) for c in caps)
        return Series(self.ring, caps, self.data[sl], self.shift, self.prec)

    def pad(self, caps):
        """Extend the caps with zero coefficients (only sound for polynomials)."""
        caps = (caps,) if isinstance(caps, int) else tuple(caps)
        data = K.pad_to(self.data, caps + self.ring.shape)
        return Series(self.ring, caps, data, self.shift, self.prec)

    def to_ring(self, ring):
        if ring == self.ring:
            return self
        elems = [Element(self.ring, self.data[idx], self.shift, self.prec).to_ring(ring)
                 for idx in np.ndindex(self.caps)]
        s = max([self.shift] + [e.shift for e in elems])
        out = K.zeros(self.caps + ring.shape)
        prec = self.prec
        for idx, e in zip(np.ndindex(self.caps), elems):
            out[idx] = e.data * self.p ** (s - e.shift)
            prec = _pmin(prec, e.prec)
        return Series(ring, self.caps, out, s, prec)

    def map_coeffs(self, fn):
        """Apply a coefficientwise function returning Elements of a common ring."""
        vals = [fn(c) for c in self.coeffs()]
        ring = vals[0].ring if vals else self.ring
        out = Series.from_coeffs(ring, np.array(vals, dtype=object).reshape(self.caps).tolist()
                                 if self.nvars > 1 else vals, self.caps)
        return out

    def frobenius(self, k=1):
        return self.map_coeffs(lambda c: c.frobenius(k))

    # -- arithmetic --------------------------------------------------------
    def _align(self, other):
        if isinstance(other, Series):
            if other.caps != self.caps:
                raise CapMismatch(f"caps {self.caps} vs {other.caps}")
            if other.ring != self.ring:
                if (other.ring.p, other.ring.ap) != (self.ring.p, self.ring.ap):
                    raise DescriptorMismatch(f"{self.ring} vs {other.ring}")
                joint = self.ring.join(other.ring)
                return self.to_ring(joint), other.to_ring(joint)
            return self, other
        if isinstance(other, (int, Fraction, Element)):
            c = _scalar(self.ring, other) if not isinstance(other, Element) or \
                self.ring.contains(other.ring) else None
            if c is None:
                joint = self.ring.join(other.ring)
                return self.to_ring(joint)._align(other)
            return self, Series.zero(self.ring, self.caps)._add_constant(c)
        return NotImplemented, NotImplemented

    def _add_constant(self, c):
        s = max(self.shift, c.shift)
        data = self.data * self.p ** (s - self.shift)
        idx = (0,) * self.nvars
        data[idx] = data[idx] + c.data * self.p ** (s - c.shift)
        return Series(self.ring, self.caps, data, s, _pmin(self.prec, c.prec))

    def __add__(self, other):
        a, b = self._align(other)
        if a is NotImplemented:
            return NotImplemented
        s = max(a.shift, b.shift)
        data = a.data * a.p ** (s - a.shift) + b.data * b.p ** (s - b.shift)
        return Series(a.ring, a.caps, data, s, _pmin(a.prec, b.prec))

    __radd__ = __add__

    def __neg__(self):
        return Series(self.ring, self.caps, -self.data, self.shift, self.prec)

    def __sub__(self, other):
        a, b = self._align(other)
        if a is NotImplemented:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) or (isinstance(other, Element)
                                                  and self.ring.contains(other.ring)):
            return self.scale(other)
        a, b = self._align(other)
        if a is NotImplemented:
            return NotImplemented
        prec = _pmin(_padd(a.prec, b.vfloor()), _padd(b.prec, a.vfloor()))
        nv = a.nvars
        keep = a.caps + tuple(2 * d - 1 for d in a.ring.shape)
        raw = K.sconvolve(a.data, b.data, keep)
        raw = _ring_reduce(raw, a.ring, lead=nv)
        return Series(a.ring, a.caps, raw, a.shift + b.shift, prec)

    def __rmul__(self, other):
        return self.__mul__(other)

    def scale(self, c):
        """Multiply every coefficient by a scalar."""
        c = _scalar(self.ring, c)
        prec = _pmin(_padd(self.prec, c.vfloor()), _padd(c.prec, self.vfloor()))
        if self.ring.rank == 1:
            data = self.data * int(c.data.flat[0])
        else:
            nv = self.nvars
            raw = K.sconvolve(self.data, c.data.reshape((1,) * nv + c.data.shape))
            data = _ring_reduce(raw, self.ring, lead=nv)
        return Series(self.ring, self.caps, data, self.shift + c.shift, prec)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        c = _scalar(self.ring, other)
        inv = c.inverse()
        out = self.scale(inv)
        vi = inv.vfloor()
        if self.prec is None and c.prec is None:
            return out.with_prec(inv.prec)
        prec = _pmin(_padd(self.prec, vi), _padd(_padd(c.prec, 2 * vi), self.vfloor()))
        return out.with_prec(prec)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = Series.one(self.ring, self.caps)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (Series, int, Fraction, Element)):
            try:
                return (self - other).is_zero()
            except (CapMismatch, DescriptorMismatch):
                return False
        return NotImplemented

    __hash__ = None

    def mul_p_power(self, k):
        """Multiply by p^k (k may be negative) without touching precision bookkeeping
        beyond the exact shift."""
        prec = None if self.prec is None else self.prec + k
        if k >= 0:
            return Series(self.ring, self.caps, self.data * self.p ** k, self.shift, prec)
        return Series(self.ring, self.caps, self.data, self.shift - k, prec)

    def shift_x(self, k, var=0):
        """Multiply (k > 0) or exactly divide (k < 0) by the k-th power of a variable."""
        moved = np.moveaxis(self.data, var, 0)
        out = K.zeros(moved.shape)
        if k >= 0:
            out[k:] = moved[:moved.shape[0] - k]
            caps = self.caps
        else:
            k = -k
            if any(moved[:k].flat):
                raise ArithmeticError("series is not divisible by that power of the variable")
            out = moved[k:]
            caps = list(self.caps)
            caps[var] -= k
            caps = tuple(caps)
        return Series(self.ring, caps, np.moveaxis(out, 0, var), self.shift, self.prec)

    # -- inverse, composition, derivatives ---------------------------------
    def inverse(self):
        """Multiplicative inverse; the constant term must be invertible."""
        c0 = self[(0,) * self.nvars]
        if c0.is_zero():
            raise ZeroAtPrecision("constant term vanishes; series is not invertible")
        inv0 = c0.inverse()
        one = Series.one(self.ring, self.caps)
        g = Series.constant(self.ring, self.caps, inv0)
        total = sum(self.caps)
        steps = max(1, math.ceil(math.log2(total + 1)) + 1)
        # Newton: g <- g (2 - f g)
        for _ in range(steps):
            g = g * (one * 2 - self * g)
        return g

    def derivative(self, var=0):
        moved = np.moveaxis(self.data, var, 0)
        out = K.zeros(moved.shape)
        for k in range(1, moved.shape[0]):
            out[k - 1] = moved[k] * k
        return Series(self.ring, self.caps, np.moveaxis(out, 0, var), self.shift, self.prec)

    def compose(self, g):
        """f(g) for a one-variable f and a series g of any arity with g(0) = 0."""
        if self.nvars != 1:
            raise CapMismatch("compose expects a one-variable outer series")
        if not g[(0,) * g.nvars].is_zero():
            raise NotInDisk("inner series must have zero constant term")
        ring = self.ring.join(g.ring) if g.ring != self.ring else self.ring
        g = g.to_ring(ring)
        f = self.to_ring(ring)
        cap = self.caps[0]
        acc = Series.zero(ring, g.caps)
        for j in range(cap - 1, -1, -1):
            acc = acc * g + f[j]
        # unknown terms beyond the outer cap have g-order >= cap
        return acc

    def revert(self):
        return revert(self)

    def eval_at(self, x, tail_floor=None):
        return eval_at(self, x, tail_floor)


TruncSeries1 = Series
TruncSeries2 = Series


def _flatten(c):
    if isinstance(c, (list, tuple)):
        for x in c:
            yield from _flatten(x)
    else:
        yield c


def _nested_shape(c):
    shape = []
    while isinstance(c, (list, tuple)):
        shape.append(len(c))
        c = c[0] if c else None
    return tuple(shape)


# ---------------------------------------------------------------------------

def cyclotomic_poly(ring, n, cap=None):
    """Phi_{p^n}(1 + X) as a series; the polynomial has degree p^(n-1)(p-1)."""
    if n < 1:
        raise ValueError("cyclotomic level must be >= 1")
    p = ring.p
    deg = p ** (n - 1) * (p - 1)
    if cap is None:
        cap = deg + 1
    if cap <= deg:
        warnings.warn(f"cap {cap} truncates Phi_(p^{n})(1+X) of degree {deg}",
                      CapTooSmallWarning, stacklevel=2)
    step = p ** (n - 1)
    coeffs = [0] * cap
    for i in range(p):
        e = i * step
        for k in range(min(e, cap - 1) + 1):
            coeffs[k] += math.comb(e, k)
    return Series.from_coeffs(ring, coeffs, cap)


def omega(ring, n, cap=None):
    """(1 + X)^(p^n) - 1."""
    pn = ring.p ** n
    if cap is None:
        cap = pn + 1
    coeffs = [math.comb(pn, k) if 0 < k <= pn else 0 for k in range(cap)]
    return Series.from_coeffs(ring, coeffs, cap)


def eval_at(f, x, tail_floor=None):
    """Evaluate a one-variable series at a point of positive valuation.

    The omitted tail sum_{j >= M} c_j x^j is bounded using `tail_floor`, a
    lower bound on the valuation of the unknown coefficients (default: the
    smallest valuation among the known coefficients; pass math.inf for a
    polynomial).  The returned element's precision includes that bound.
    """
    if not isinstance(x, Element):
        x = _scalar(f.ring, x)
    if x.is_zero():
        return f[0]
    vx = x.valuation()
    if vx <= 0:
        raise NotInDisk(f"valuation {vx} is not positive")
    ring = f.ring.join(x.ring) if f.ring != x.ring else f.ring
    x = x.to_ring(ring)
    M = f.caps[0]
    acc = Element.from_value(ring, 0)
    coeffs = [f[j].to_ring(ring) for j in range(M)]
    for c in reversed(coeffs):
        acc = acc * x + c
    if tail_floor is None:
        tail_floor = f.vfloor()
    if tail_floor == math.inf:
        return acc
    bound = M * vx + tail_floor
    return acc.with_prec(math.floor(bound))


def revert(f):
    """Compositional inverse of a one-variable series with f(0)=0, f'(0) a unit."""
    if f.nvars != 1:
        raise NotReversible("revert needs a one-variable series")
    M = f.caps[0]
    if M < 2:
        raise NotReversible("cap too small")
    if not f[0].is_zero():
        raise NotReversible("constant term must vanish")
    a1 = f[1]
    if a1.is_zero() or a1.vfloor() != 0:
        raise NotReversible("linear coefficient must be a unit")
    ring = f.ring
    X = Series.var(ring, M)
    g = X / a1
    df = f.derivative()
    for _ in range(max(1, math.ceil(math.log2(M)) + 1)):
        err = f.compose(g) - X
        if err.is_zero():
            break
        g = g - err * df.compose(g).inverse()
    return g


# ---------------------------------------------------------------------------

def _taylor_to_T(coeffs_x):
    """Coefficients of sum c_k X^k rewritten in powers of T = 1 + X (X = T - 1)."""
    M = coeffs_x.shape[0]
    out = K.zeros(coeffs_x.shape)
    for k in range(M):
        ck = coeffs_x[k]
        if not any(np.asarray(ck).flat):
            continue
        for i in range(k + 1):
            sign = -1 if (k - i) % 2 else 1
            out[i] = out[i] + sign * math.comb(k, i) * ck
    return out


class GroupRingElement:
    """Element of Z_p[T]/(T^(p^n) - 1) over a coefficient ring, T = 1 + X."""

    __slots__ = ("ring", "level", "data", "shift", "prec")

    def __init__(self, ring, level, data, shift=0, prec=None):
        size = ring.p ** level
        data = np.asarray(data, dtype=object).reshape((size,) + ring.shape)
        self.data, self.shift = K.normalize(data, shift, prec, ring.p)
        self.ring = ring
        self.level = level
        self.prec = prec

    @classmethod
    def from_coeffs(cls, ring, level, coeffs, prec=None):
        s = Series.from_coeffs(ring, list(coeffs), ring.p ** level, prec)
        return cls(ring, level, s.data, s.shift, s.prec)

    @classmethod
    def one(cls, ring, level):
        return cls.from_coeffs(ring, level, [1] + [0] * (ring.p ** level - 1))

    @classmethod
    def norm_element(cls, ring, level):
        """sum over the kernel of the projection to level - 1."""
        if level < 1:
            raise LevelZero("norm element needs level >= 1")
        return lift_nu(cls.one(ring, level - 1))

    @property
    def p(self):
        return self.ring.p

    def __getitem__(self, i):
        return Element(self.ring, self.data[i], self.shift, self.prec)

    def coeffs(self):
        return [self[i] for i in range(self.data.shape[0])]

    def is_zero(self):
        return not any(self.data.flat)

    def vfloor(self):
        v = K.vp_array(self.data, self.p)
        if v is None:
            return math.inf if self.prec is None else self.prec
        return v - self.shift

    def with_prec(self, prec):
        if prec is None:
            return self
        if self.prec is not None:
            prec = min(prec, self.prec)
        return GroupRingElement(self.ring, self.level, self.data, self.shift, prec)

    def __repr__(self):
        pr = "exact" if self.prec is None else f"O(p^{self.prec})"
        return f"GroupRingElement(level={self.level}, {[c.coords() for c in self.coeffs()][:9]}, {pr})"

    def _check(self, other):
        if isinstance(other, GroupRingElement):
            if other.level != self.level:
                raise CapMismatch("group ring levels differ")
            if other.ring != self.ring:
                raise DescriptorMismatch(f"{self.ring} vs {other.ring}")
            return other
        c = _scalar(self.ring, other)
        return GroupRingElement.one(self.ring, self.level)._scale(c)

    def _scale(self, c):
        s = Series(self.ring, (self.data.shape[0],), self.data, self.shift, self.prec).scale(c)
        return GroupRingElement(self.ring, self.level, s.data, s.shift, s.prec)

    def __add__(self, other):
        other = self._check(other)
        s = max(self.shift, other.shift)
        data = self.data * self.p ** (s - self.shift) + other.data * self.p ** (s - other.shift)
        return GroupRingElement(self.ring, self.level, data, s, _pmin(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement(self.ring, self.level, -self.data, self.shift, self.prec)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GroupRingElement):
            return self._scale(_scalar(self.ring, other))
        other = self._check(other)
        size = self.data.shape[0]
        raw = K.sconvolve(self.data, other.data)
        raw = _ring_reduce(raw, self.ring, lead=1)
        folded = K.zeros((size,) + raw.shape[1:])
        for i in range(raw.shape[0]):
            folded[i % size] = folded[i % size] + raw[i]
        prec = _pmin(_padd(self.prec, other.vfloor()), _padd(other.prec, self.vfloor()))
        return GroupRingElement(self.ring, self.level, folded, self.shift + other.shift, prec)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (GroupRingElement, int, Fraction, Element)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    def to_series(self, cap):
        """The polynomial sum c_i (1 + X)^i as a series in X."""
        size = self.data.shape[0]
        out = K.zeros((cap,) + self.ring.shape)
        for i in range(size):
            ci = self.data[i]
            if not any(np.asarray(ci).flat):
                continue
            for k in range(min(i, cap - 1) + 1):
                out[k] = out[k] + math.comb(i, k) * ci
        return Series(self.ring, (cap,), out, self.shift, self.prec)

    def project(self):
        return project_pi(self)

    def lift(self):
        return lift_nu(self)

    def eval_character(self, j, e=1):
        return eval_character(self, j, e)


def reduce_to_level(f, n):
    """Image of a one-variable series (read as a polynomial) in Z_p[T]/(T^(p^n) - 1)."""
    size = f.p ** n
    M = f.caps[0]
    if M < size:
        warnings.warn(f"cap {M} < p^{n}: coefficients beyond the cap are dropped",
                      CapTooSmallWarning, stacklevel=2)
    t = _taylor_to_T(f.data)
    folded = K.zeros((size,) + f.ring.shape)
    for i in range(M):
        folded[i % size] = folded[i % size] + t[i]
    return GroupRingElement(f.ring, n, folded, f.shift, f.prec)


def project_pi(e):
    """Natural map from level n to level n - 1."""
    if e.level < 1:
        raise LevelZero("cannot project below level 0")
    size = e.p ** (e.level - 1)
    out = K.zeros((size,) + e.ring.shape)
    for i in range(e.data.shape[0]):
        out[i % size] = out[i % size] + e.data[i]
    return GroupRingElement(e.ring, e.level - 1, out, e.shift, e.prec)


def lift_nu(e):
    """Norm lift from level n - 1 to level n: multiply a lift by the kernel norm element."""
    reps = e.p
    data = np.concatenate([e.data] * reps, axis=0)
    return GroupRingElement(e.ring, e.level + 1, data, e.shift, e.prec)


def eval_character(e, j, exponent=1):
    """Ring map T -> zeta_{p^j}^exponent into the cyclotomic ring of level j."""
    if j > e.level or j < 0:
        raise ValueError("character level must lie in [0, level]")
    ring = e.ring.with_(n=max(e.ring.n, j))
    if j == 0:
        total = Element(e.ring, e.data.sum(axis=0), e.shift, e.prec)
        return total.to_ring(ring) if ring != e.ring else total
    from .padic import _zeta_power_table
    table = _zeta_power_table(e.p, j)
    pj = e.p ** j
    # matrix sending index i to the coordinates of zeta^(exponent * i)
    size = e.data.shape[0]
    S = [table[(exponent * i) % pj] for i in range(size)]
    if e.ring.n == 0:
        data = _apply_axis_matrix(e.data, 0, S)
        shape = ring.shape
        return Element(ring, data.reshape(shape), e.shift, e.prec)
    z = ring.zeta()
    zj = z ** (e.p ** (ring.n - j) * exponent % e.p ** ring.n)
    total = ring.zero()
    power = ring.one()
    for i in range(size):
        total = total + e[i].to_ring(ring) * power
        power = power * zj
    return total


# ---------------------------------------------------------------------------

class Mat2:
    """2x2 matrix with entries in a common series or group ring."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_rows(cls, rows):
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    def entries(self):
        return [self.a, self.b, self.c, self.d]

    def __getitem__(self, ij):
        i, j = ij
        return self.rows()[i][j]

    def __mul__(self, other):
        if isinstance(other, Mat2):
            return Mat2(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                        self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)
        return Mat2(self.a * other, self.b * other, self.c * other, self.d * other)

    def __rmul__(self, other):
        return Mat2(other * self.a, other * self.b, other * self.c, other * self.d)

    def __add__(self, other):
        return Mat2(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other):
        return Mat2(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def det(self):
        return self.a * self.d - self.b * self.c

    def adj(self):
        return Mat2(self.d, -self.b, -self.c, self.a)

    def transpose(self):
        return Mat2(self.a, self.c, self.b, self.d)

    def map(self, fn):
        return Mat2(fn(self.a), fn(self.b), fn(self.c), fn(self.d))

    def is_zero(self):
        return all(x.is_zero() for x in self.entries())

    def row_vec_mul(self, u, v):
        """(u, v) * M."""
        return (u * self.a + v * self.c, u * self.b + v * self.d)

    def vec_mul(self, u, v):
        """M * (u, v)^T."""
        return (self.a * u + self.b * v, self.c * u + self.d * v)

    def __repr__(self):
        return f"Mat2({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


Mat2Series = Mat2
