"""Batch command line front end.

    sharpflat <subcommand> [--p INT] [--ap INT] [--prec-p INT] [--prec-x INT]
              [--prec-y INT] [--level INT] [--nmax INT] [--mmax INT] [--seed INT]
              [--in PATH]... [--out PATH] [--verify] [--format json]

Every artifact is canonical JSON with the run configuration and a sha256
digest.  Exit codes: 0 success, 2 not decomposable, 3 precision exhausted,
4 malformed input, 1 when --verify finds its own output inconsistent.
"""

import argparse
from dataclasses import asdict, dataclass, field
import hashlib
import json
import sys

from . import serialize as S
from .padic import RingDescriptor
from .errors import (NotDecomposable, PrecisionExhausted, SharpflatError,
                     DescriptorMismatch)

EXIT_OK, EXIT_VERIFY, EXIT_NOT_DECOMPOSABLE, EXIT_PRECISION, EXIT_MALFORMED = 0, 1, 2, 3, 4

SUBCOMMANDS = ("logmat", "prep", "prep2", "decompose", "decompose2", "mt-stabilize",
               "honda", "growth", "gen")
GEN_KINDS = ("pair", "lalpha-lbeta", "four", "fourmatrix", "theta-tower", "series", "series2")


class UsageError(Exception):
    pass


class VerifyFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    p: int = 3
    ap: int = 3
    N: int = 10
    M: int = 27
    MY: int = None
    level: int = None
    nmax: int = 3
    mmax: int = 1
    seed: int = 0
    inputs: list = field(default_factory=list)      # sha256 of each input file
    flags: dict = field(default_factory=dict)

    def ring(self, N=None):
        return RingDescriptor(self.p, self.ap, self.N if N is None else N)

    def to_json(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


def build_parser():
    ap = _Parser(prog="sharpflat", add_help=True)
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("kind", nargs="?", default=None)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--ap", type=int, default=3)
    ap.add_argument("--prec-p", type=int, default=None)
    ap.add_argument("--prec-x", type=int, default=None)
    ap.add_argument("--prec-y", type=int, default=None)
    ap.add_argument("--level", type=int, default=None)
    ap.add_argument("--at-root", type=int, default=None)
    ap.add_argument("--nmax", type=int, default=3)
    ap.add_argument("--mmax", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--xi", choices=("alpha", "beta"), default="alpha")
    ap.add_argument("--in", dest="inputs", action="append", default=[])
    ap.add_argument("--out", default=None)
    ap.add_argument("--verify", action="store_true")
    ap.add_argument("--format", choices=("json",), default="json")
    return ap


_DEFAULTS = {"logmat": (10, 27), "prep": (20, 20), "prep2": (20, 8), "decompose": (12, 81),
             "decompose2": (10, 27), "mt-stabilize": (10, 1), "honda": (8, 10),
             "growth": (20, 27), "gen": (12, 81)}


def make_config(args):
    N0, M0 = _DEFAULTS[args.subcommand]
    flags = {}
    if args.kind is not None:
        flags["kind"] = args.kind
    if args.at_root is not None:
        flags["atRoot"] = args.at_root
    if args.subcommand == "mt-stabilize":
        flags["xi"] = args.xi
    if args.verify:
        flags["verify"] = True
    digests = []
    for path in args.inputs:
        try:
            with open(path, "rb") as fh:
                digests.append("sha256:" + hashlib.sha256(fh.read()).hexdigest())
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}")
    cfg = RunConfig(args.subcommand, args.p, args.ap,
                    args.prec_p if args.prec_p is not None else N0,
                    args.prec_x if args.prec_x is not None else M0,
                    args.prec_y, args.level, args.nmax, args.mmax, args.seed, digests, flags)
    try:
        cfg.ring()
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid ring parameters: {exc}")
    if cfg.N < 1 or cfg.M < 1:
        raise UsageError("precisions must be positive")
    return cfg


def _load(args, i=0):
    if len(args.inputs) <= i:
        raise UsageError(f"{args.subcommand} needs --in")
    try:
        with open(args.inputs[i]) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise S.MalformedInput(f"{args.inputs[i]}: not JSON ({exc.msg})")
    # artifacts written by this tool wrap their payload
    if isinstance(obj, dict) and "result" in obj and "config" in obj:
        if not S.check_digest(obj):
            raise S.MalformedInput(f"{args.inputs[i]}: digest does not match content")
        obj = obj["result"]
    return obj


def _fmt_float(x):
    return f"{x:.6f}"


# ---------------------------------------------------------------------------
# subcommands; each returns the payload dict

def cmd_logmat(cfg, args):
    from .logmatrix import log_matrix, log_matrix_at_root
    ring = cfg.ring()
    if args.at_root is not None:
        mat = log_matrix_at_root(ring, args.at_root)
        out = {"atRoot": args.at_root,
               "matrix": {"rows": [[S.scalar_to_json(x) for x in r] for r in mat.rows()]},
               "ring": mat.a.ring.header()}
        return out
    res = log_matrix(ring, cfg.N, cfg.M)
    if args.verify:
        ext = res.extended(1)
        if not all((a - b).with_prec(cfg.N).is_zero()
                   for a, b in zip(ext.entries(), res.matrix.entries())):
            raise VerifyFailed("one more factor changes the matrix")
    return {"matrix": S.mat2_to_json(res.matrix), "certificate": res.certificate}


def cmd_prep(cfg, args):
    from .weierstrass import prep1
    f = S.series_from_json(_load(args))
    if f.nvars != 1:
        raise S.MalformedInput("prep expects a one-variable series")
    res = prep1(f)
    if args.verify and not (res.recompose() - f).with_prec(res.prec).is_zero():
        raise VerifyFailed("recomposition differs from the input")
    return {"mu": res.mu, "lambda": res.lam,
            "distinguished": [S.scalar_to_json(c) for c in res.distinguished_coeffs()],
            "unitConstant": S.scalar_to_json(res.unit_constant()),
            "prec": int(res.prec), "determined": int(res.determined)}


def cmd_prep2(cfg, args):
    from .weierstrass import prep2
    f = S.series_from_json(_load(args))
    if f.nvars != 2:
        raise S.MalformedInput("prep2 expects a two-variable series")
    res = prep2(f)
    if args.verify:
        if not (res.recompose() - f).with_prec(res.prec).is_zero():
            raise VerifyFailed("recomposition differs from the input")
        if res.ideal_violations():
            raise VerifyFailed(f"ideal violations {res.ideal_violations()}")
    return {"mu": res.mu,
            "factors": [{"var": v, "lambda": res.lambdas[v], "series": S.series_to_json(D)}
                        for v, D in res.factors],
            "unitConstant": S.scalar_to_json(res.unit[(0, 0)]), "prec": int(res.prec)}


def cmd_decompose(cfg, args):
    from .decompose import decompose1, compose1
    obj = _load(args)
    try:
        la = S.series_from_json(obj["L_alpha"])
        lb = S.series_from_json(obj["L_beta"])
    except (KeyError, TypeError) as exc:
        raise S.MalformedInput(f"expected L_alpha and L_beta: {exc}")
    pair = decompose1(la, lb, cfg.N, cfg.M)
    if args.verify:
        back = compose1(pair, cfg.N, cfg.M)
        for got, want in zip(back, (la, lb)):
            if not (got - want.truncate((cfg.M,))).with_prec(cfg.N - 4).is_zero():
                raise VerifyFailed("recomposed pair differs from the input")
    return {"sharp": S.series_to_json(pair.sharp), "flat": S.series_to_json(pair.flat),
            "certificate": pair.certificate}


def cmd_decompose2(cfg, args):
    from .decompose import decompose2, compose2
    four = S.mat2_from_json(_load(args))
    caps = (cfg.M, cfg.MY if cfg.MY is not None else cfg.M)
    out = decompose2(four, cfg.N, caps)
    if args.verify:
        back = compose2(out, cfg.N, caps)
        for got, want in zip(back.entries(), four.entries()):
            if not (got - want.truncate(caps)).with_prec(cfg.N - 8).is_zero():
                raise VerifyFailed("recomposed matrix differs from the input")
    return {"matrix": S.mat2_to_json(out), "certificate": {"tolerance": 0,
            "minValuation": str(min(min(e.vfloor() for e in out.entries()), cfg.N))}}


def cmd_mt(cfg, args):
    from .decompose import stabilize, three_term_defect
    theta = S.tower_from_json(_load(args), cfg.N)
    tower = stabilize(theta, args.xi, cfg.N)
    levels = [S.groupring_to_json(tower.levels[n]) for n in sorted(tower.levels)]
    compat = [tower.compatible(n) for n in range(len(theta) - 1)]
    relation = [three_term_defect(theta, n).is_zero() for n in range(len(theta) - 1)]
    if args.verify and not all(c or not r for c, r in zip(compat, relation)):
        raise VerifyFailed("a level satisfying the three-term relation is not compatible")
    return {"xi": args.xi, "levels": levels, "compatible": compat, "threeTermRelation": relation}


def cmd_honda(cfg, args):
    from .honda import verify_traces, recurrence_tables
    if args.kind not in (None, "verify"):
        raise UsageError("honda supports only 'verify'")
    rep = verify_traces(cfg.p, cfg.ap, cfg.nmax, cfg.mmax, cfg.N)
    if args.verify:
        if recurrence_tables(10, 10, cfg.p, cfg.ap).check_matrix_powers():
            raise VerifyFailed("x_k table disagrees with matrix powers")
        conv = rep["convention"]
        if conv is None:
            raise VerifyFailed("no convention satisfies both trace relations")
        key = f"{conv['weights']}/{conv['twist']}"
        if not all(c["pass"] for c in rep["cases"] if c["convention"] == key):
            raise VerifyFailed("the chosen convention fails a trace relation")
    return {"convention": rep["convention"], "conventions": rep["conventions"],
            "cases": rep["cases"]}


def cmd_growth(cfg, args):
    from .logmatrix import log_matrix, growth_profile, log_series
    ring = cfg.ring()
    res = log_matrix(ring, cfg.N, cfg.M)
    entries = {}
    for name, s in zip(("a", "b", "c", "d"), res.matrix.entries()):
        entries[name] = _fmt_float(growth_profile(s).order)
    calib = growth_profile(log_series(ring.with_(N=cfg.N), cfg.M)).order
    if args.verify and abs(calib - 1.0) > 0.1:
        raise VerifyFailed(f"calibration order {calib}")
    return {"orders": entries, "calibration": _fmt_float(calib)}


def cmd_gen(cfg, args):
    from . import decompose as D
    kind = args.kind
    ring = cfg.ring()
    if kind == "pair":
        P = D.random_pair(ring, cfg.M, cfg.seed, cfg.N)
        return {"sharp": S.series_to_json(P.sharp), "flat": S.series_to_json(P.flat)}
    if kind == "lalpha-lbeta":
        P = D.random_pair(ring, cfg.M, cfg.seed, cfg.N)
        Nin = D.decompose_input_prec(cfg.p, cfg.N, cfg.M)
        la, lb = D.compose1(P, Nin, cfg.M)
        return {"L_alpha": S.series_to_json(la), "L_beta": S.series_to_json(lb),
                "pair": {"sharp": S.series_to_json(P.sharp), "flat": S.series_to_json(P.flat)}}
    if kind in ("four", "fourmatrix"):
        caps = (cfg.M, cfg.MY if cfg.MY is not None else cfg.M)
        F = D.random_four(ring, caps, cfg.seed, cfg.N)
        if kind == "four":
            return S.mat2_to_json(F)
        Nin = D.decompose_input_prec(cfg.p, cfg.N, max(caps), 2)
        out = S.mat2_to_json(D.compose2(F, Nin, caps))
        out["source"] = S.mat2_to_json(F)
        return out
    if kind == "theta-tower":
        return S.tower_to_json(D.random_theta_tower(ring, cfg.nmax, cfg.seed, cfg.N))
    if kind in ("series", "series2"):
        import random
        rng = random.Random(cfg.seed)
        caps = (cfg.M,) if kind == "series" else (cfg.M, cfg.MY or cfg.M)
        from .series import Series
        import numpy as np
        from . import _kernel as K
        data = K.zeros(caps + ring.shape)
        for idx in np.ndindex(caps):
            data[idx] = rng.randrange(cfg.p ** cfg.N)
        return S.series_to_json(Series(ring, caps, data))
    raise UsageError(f"gen kind must be one of {', '.join(GEN_KINDS)}")


HANDLERS = {"logmat": cmd_logmat, "prep": cmd_prep, "prep2": cmd_prep2,
            "decompose": cmd_decompose, "decompose2": cmd_decompose2,
            "mt-stabilize": cmd_mt, "honda": cmd_honda, "growth": cmd_growth, "gen": cmd_gen}


def _error(kind, msg, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(msg)}, sort_keys=True) + "\n")
    return code


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
        payload = HANDLERS[args.subcommand](cfg, args)
    except UsageError as exc:
        return _error("UsageError", exc, EXIT_MALFORMED)
    except (S.MalformedInput, DescriptorMismatch) as exc:
        return _error(type(exc).__name__, exc, EXIT_MALFORMED)
    except NotDecomposable as exc:
        return _error("NotDecomposable", exc, EXIT_NOT_DECOMPOSABLE)
    except PrecisionExhausted as exc:
        return _error("PrecisionExhausted", exc, EXIT_PRECISION)
    except VerifyFailed as exc:
        return _error("VerifyFailed", exc, EXIT_VERIFY)
    except SharpflatError as exc:
        return _error(type(exc).__name__, exc, EXIT_MALFORMED)
    doc = S.with_digest({"config": cfg.to_json(), "result": payload})
    text = S.dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())
