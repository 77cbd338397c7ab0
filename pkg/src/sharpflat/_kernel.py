"""Integer array kernels shared by the scalar and series layers.

All arrays are numpy object arrays of Python ints.  Multiplication goes
through Kronecker substitution: both operands are packed into one big
integer, multiplied once, and unpacked.
"""

import numpy as np


def vp(n, p):
    """p-adic valuation of a nonzero integer."""
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_array(a, p):
    """Minimum valuation over the nonzero entries of `a`, or None if all zero."""
    best = None
    for x in np.asarray(a).flat:
        if x:
            v = vp(int(x), p)
            if best is None or v < best:
                best = v
                if v == 0:
                    break
    return best


def zeros(shape):
    out = np.empty(shape, dtype=object)
    out.fill(0)
    return out


def asobj(a):
    a = np.asarray(a, dtype=object)
    return a


def _pack(flat, nbytes):
    return int.from_bytes(b"".join(int(x).to_bytes(nbytes, "little") for x in flat), "little")


def _unpack(value, nbytes, count):
    raw = value.to_bytes(nbytes * count, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") for i in range(count)]


def convolve(a, b, keep=None):
    """Full multi-axis convolution of two nonnegative integer arrays.

    `keep` optionally truncates each output axis to the given length.
    """
    a = asobj(a)
    b = asobj(b)
    if a.ndim != b.ndim:
        raise ValueError("rank mismatch in convolve")
    full = tuple(x + y - 1 for x, y in zip(a.shape, b.shape))
    if keep is None:
        keep = full
    keep = tuple(min(k, f) for k, f in zip(keep, full))
    if a.size == 0 or b.size == 0:
        return zeros(keep)
    ma = max(int(x) for x in a.flat)
    mb = max(int(x) for x in b.flat)
    if ma == 0 or mb == 0:
        return zeros(keep)
    if min(int(x) for x in a.flat) < 0 or min(int(x) for x in b.flat) < 0:
        raise ValueError("convolve needs nonnegative entries")
    if a.size * b.size <= 64:
        out = zeros(full)
        for idx in np.ndindex(a.shape):
            c = a[idx]
            if c:
                sl = tuple(slice(i, i + s) for i, s in zip(idx, b.shape))
                out[sl] += c * b
        return out[tuple(slice(0, k) for k in keep)]
    bound = ma * mb * min(a.size, b.size)
    nbytes = (bound.bit_length() + 8) // 8
    ea = zeros(full)
    ea[tuple(slice(0, s) for s in a.shape)] = a
    eb = zeros(full)
    eb[tuple(slice(0, s) for s in b.shape)] = b
    prod = _pack(ea.flat, nbytes) * _pack(eb.flat, nbytes)
    out = np.array(_unpack(prod, nbytes, ea.size), dtype=object).reshape(full)
    return out[tuple(slice(0, k) for k in keep)]


def reduce_axis(arr, axis, poly):
    """Reduce along `axis` modulo a monic integer polynomial (low-to-high coefficients)."""
    d = len(poly) - 1
    arr = np.moveaxis(arr, axis, 0).copy()
    for k in range(arr.shape[0] - 1, d - 1, -1):
        top = arr[k]
        if not any(np.asarray(top).flat):
            continue
        for j in range(d):
            if poly[j]:
                arr[k - d + j] = arr[k - d + j] - poly[j] * top
    arr = arr[:d]
    if arr.shape[0] < d:
        pad = zeros((d - arr.shape[0],) + arr.shape[1:])
        arr = np.concatenate([arr, pad], axis=0)
    return np.moveaxis(arr, 0, axis)


def mod(arr, modulus):
    out = asobj(arr) % modulus
    return out


def pad_to(arr, shape):
    out = zeros(shape)
    out[tuple(slice(0, min(s, t)) for s, t in zip(arr.shape, shape))] = \
        arr[tuple(slice(0, min(s, t)) for s, t in zip(arr.shape, shape))]
    return out


def sconvolve(a, b, keep=None):
    """Signed convolution: split each operand into positive and negative parts."""
    a = asobj(a)
    b = asobj(b)
    neg_a = any(int(x) < 0 for x in a.flat)
    neg_b = any(int(x) < 0 for x in b.flat)
    if not neg_a and not neg_b:
        return convolve(a, b, keep)
    ap, an = np.where(a > 0, a, 0), np.where(a < 0, -a, 0)
    bp, bn = np.where(b > 0, b, 0), np.where(b < 0, -b, 0)
    return (convolve(ap, bp, keep) + convolve(an, bn, keep)
            - convolve(ap, bn, keep) - convolve(an, bp, keep))


def normalize(data, shift, prec, p):
    """Canonical (data, shift) for the value data / p^shift known mod p^prec.

    Coordinates are reduced mod p^(prec + shift) and common factors of p are
    pulled out of a positive shift.
    """
    if prec is not None:
        e = prec + shift
        if e <= 0:
            return zeros(data.shape), max(0, -prec)
        data = data % p ** e
    else:
        data = data.copy()
    if not any(data.flat):
        return data, (0 if prec is None else max(0, -prec))
    while shift > 0 and all(int(x) % p == 0 for x in data.flat):
        data = data // p
        shift -= 1
    return data, shift
