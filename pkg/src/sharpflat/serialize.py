"""JSON forms of scalars, series, group ring elements and towers.

Scalars are {"val": "a/b", "mantissa": "<digits>", "prec": int | null}; the
mantissa is the integer coordinate before division by p^shift.  Extension
elements carry one scalar per coordinate.  No floats appear anywhere.
"""

from fractions import Fraction
import hashlib
import json

import numpy as np

from .padic import Element, RingDescriptor
from .series import GroupRingElement, Mat2, Series


class MalformedInput(ValueError):
    pass


def _frac(q):
    return f"{q.numerator}/{q.denominator}"


def _coord(x, shift, p, prec):
    return {"val": _frac(Fraction(int(x), p ** shift)), "mantissa": str(int(x)), "prec": prec}


def _abs_prec(prec):
    return None if prec is None else int(prec)


def scalar_to_json(e):
    p = e.ring.p
    pr = _abs_prec(e.prec)
    if e.ring.rank == 1:
        return _coord(e.data.flat[0], e.shift, p, pr)
    return {"coords": [_coord(x, e.shift, p, pr) for x in e.data.flat]}


def _parse_frac(s):
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise MalformedInput(f"bad rational {s!r}") from exc


def scalar_from_json(ring, obj):
    if isinstance(obj, (int, str)):
        return ring(_parse_frac(str(obj)))
    if not isinstance(obj, dict):
        raise MalformedInput(f"scalar expected, got {type(obj).__name__}")
    if "coords" in obj:
        cs = obj["coords"]
        if len(cs) != ring.rank:
            raise MalformedInput(f"{len(cs)} coordinates for a rank {ring.rank} ring")
        vals = [_parse_frac(c["val"]) for c in cs]
        prec = cs[0].get("prec") if cs else None
    else:
        vals = [_parse_frac(obj["val"])]
        prec = obj.get("prec")
    total = ring.zero()
    for i, v in enumerate(vals):
        if v:
            idx = np.unravel_index(i, ring.shape)
            total = total + ring.basis(idx) * v
    return total.with_prec(prec) if prec is not None else total


def series_to_json(f):
    coeffs = [scalar_to_json(f[idx]) for idx in np.ndindex(f.caps)]
    return {"ring": f.ring.header(), "vars": f.vars, "caps": list(f.caps), "coeffs": coeffs}


def _ring(obj):
    try:
        return RingDescriptor.from_header(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad ring header: {exc}") from exc


def series_from_json(obj, ring=None):
    try:
        ring = ring or _ring(obj["ring"])
        caps = tuple(int(c) for c in obj["caps"])
        coeffs = obj["coeffs"]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"series needs ring, caps and coeffs: {exc}") from exc
    if len(coeffs) != int(np.prod(caps)):
        raise MalformedInput(f"{len(coeffs)} coefficients for caps {list(caps)}")
    elems = [scalar_from_json(ring, c) for c in coeffs]
    nested = np.empty(caps, dtype=object)
    for idx, e in zip(np.ndindex(caps), elems):
        nested[idx] = e
    return Series.from_coeffs(ring, nested.tolist(), caps)


def groupring_to_json(e):
    return {"ring": e.ring.header(), "level": e.level, "basis": "one-plus-X-powers",
            "coeffs": [scalar_to_json(c) for c in e.coeffs()]}


def groupring_from_json(obj, ring=None):
    try:
        ring = ring or _ring(obj["ring"])
        level = int(obj["level"])
        coeffs = obj["coeffs"]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"group ring element needs ring, level, coeffs: {exc}") from exc
    if len(coeffs) != ring.p ** level:
        raise MalformedInput(f"level {level} needs {ring.p ** level} coefficients")
    return GroupRingElement.from_coeffs(ring, level, [scalar_from_json(ring, c) for c in coeffs])


def mat2_to_json(m, to=series_to_json):
    return {"rows": [[to(x) for x in r] for r in m.rows()]}


def mat2_from_json(obj, frm=series_from_json):
    try:
        (a, b), (c, d) = obj["rows"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput("matrix needs two rows of two entries") from exc
    return Mat2(frm(a), frm(b), frm(c), frm(d))


def tower_to_json(theta):
    ring = theta[0].ring
    return {"p": ring.p, "ap": ring.ap,
            "levels": [{"n": t.level, "coeffs": [scalar_to_json(c) for c in t.coeffs()]}
                       for t in theta]}


def tower_from_json(obj, N=20):
    try:
        ring = RingDescriptor(int(obj["p"]), int(obj["ap"]), N)
        levels = sorted(obj["levels"], key=lambda x: int(x["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"tower needs p, ap, levels: {exc}") from exc
    out = []
    for i, lv in enumerate(levels):
        if int(lv["n"]) != i:
            raise MalformedInput("tower levels must be 0, 1, 2, ... without gaps")
        if len(lv["coeffs"]) != ring.p ** i:
            raise MalformedInput(f"level {i} needs {ring.p ** i} coefficients")
        out.append(GroupRingElement.from_coeffs(ring, i, [scalar_from_json(ring, c)
                                                          for c in lv["coeffs"]]))
    return out


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def with_digest(obj):
    """Attach a sha256 of the canonical form of everything else."""
    body = {k: v for k, v in obj.items() if k != "digest"}
    out = dict(body)
    out["digest"] = "sha256:" + hashlib.sha256(canonical(body).encode()).hexdigest()
    return out


def check_digest(obj):
    return with_digest(obj).get("digest") == obj.get("digest")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"
