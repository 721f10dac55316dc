"""Command line front end.

    transversal analyze chebyshev2
    transversal relations fig1
    transversal certify misiurewicz_i --chart family:1
    transversal pushforward chebyshev2 --relation 1,1,3,2
    transversal lattes-demo --a 2+0.5i
    transversal deficit-check chebyshev2 --relation 1,1,3,2

Maps are named fixtures or JSON (inline or a file path): either
{"numerator": [[re, im], ...], "denominator": [[re, im], ...]} with ascending
coefficients, or a symbolic orbit diagram {"nu", "generators", "landings"}.
Reports go to stdout as JSON; exit codes are 0 (success), 1 (negative result,
e.g. a rank defect), 2 (bad input) and 3 (numerically uncertifiable).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings

import numpy as np

from . import __version__, config
from .algebra import Moebius, is_inf
from .errors import TransversalError, UncertifiableRank
from .lattes import degeneracy_demo, flexible_lattes
from .qdiff import infinity_moments, invariance_residual, q_relation, sample_points
from .ratmap import RatMap, critical_set, family_chart, orbit
from .relations import (
    SymbolicModel,
    as_relation,
    build_proper,
    detect_relations,
    fig1_model,
    numeric_model,
)
from .transversality import (
    certify,
    deficit_identity_check,
    kernel_qdiff,
    rank_sigma_independence,
    tangent,
)

SCHEMA = "transversal.report/1"
EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_UNCERTIFIABLE = 0, 1, 2, 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------- parsing

def parse_complex(text) -> complex:
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise InputError(f"not a complex number: {text!r}") from exc


def _coeff_list(items):
    out = []
    for c in items:
        if isinstance(c, (list, tuple)) and len(c) == 2:
            out.append(complex(float(c[0]), float(c[1])))
        elif isinstance(c, (int, float)):
            out.append(complex(c))
        elif isinstance(c, str):
            out.append(parse_complex(c))
        else:
            raise InputError(f"bad coefficient {c!r}")
    return out


FIXTURES = {
    "chebyshev2": lambda: RatMap.polynomial([-2, 0, 1]),
    "chebyshev3": lambda: RatMap.polynomial([0, -3, 0, 1]),
    "misiurewicz_i": lambda: RatMap.polynomial([1j, 0, 1]),
}


def load_spec(spec):
    """Returns ("map", RatMap, is_lattes) or ("symbolic", SymbolicModel, False)."""
    if spec in FIXTURES:
        return "map", FIXTURES[spec](), False
    if spec == "fig1":
        return "symbolic", fig1_model(), False
    if spec.startswith("lattes:"):
        body = spec.split(":", 1)[1]
        if not body.startswith("a="):
            raise InputError("lattes fixture needs the form lattes:a=<complex>")
        return "map", flexible_lattes(parse_complex(body[2:])).map, True
    if spec.startswith("quadratic:"):
        body = spec.split(":", 1)[1]
        if not body.startswith("c="):
            raise InputError("quadratic fixture needs the form quadratic:c=<complex>")
        return "map", RatMap.polynomial([parse_complex(body[2:]), 0, 1]), False
    text = spec
    if not spec.lstrip().startswith("{"):
        if not os.path.exists(spec):
            raise InputError(f"unknown map spec {spec!r}")
        with open(spec) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("map spec JSON must be an object")
    if "nu" in data:
        try:
            return "symbolic", SymbolicModel.from_json(data), False
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad symbolic model: {exc}") from exc
    if "numerator" not in data:
        raise InputError("map spec JSON needs 'numerator' (and optionally 'denominator') or 'nu'")
    num = _coeff_list(data["numerator"])
    den = _coeff_list(data.get("denominator", [[1, 0]]))
    return "map", RatMap.from_coeffs(num, den), False


def parse_chart(text, f):
    if text in (None, "auto"):
        return "auto"
    if text in ("rat", "poly"):
        return text
    if text.startswith("family:"):
        body = text.split(":", 1)[1]
        num, _, den = body.partition("|")
        dnum = [parse_complex(x) for x in num.split(",") if x]
        dden = [parse_complex(x) for x in den.split(",") if x]
        return family_chart(f, dnum, dden, name=f"family:{body}")
    raise InputError(f"unknown chart {text!r} (rat, poly or family:<coeffs>[|<coeffs>])")


def parse_sigma(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError("--sigma takes four complex numbers a,b,c,d for (az+b)/(cz+d)")
    return Moebius(*[parse_complex(p) for p in parts])


def parse_relation(text):
    try:
        return as_relation([int(x) for x in text.split(",")])
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad relation {text!r}; expected i,j,m,n") from exc


# ---------------------------------------------------------------- encoding

def cnum(z):
    if is_inf(z):
        return "inf"
    z = complex(z)
    return [float(z.real), float(z.imag)]


def fnum(x):
    x = float(x)
    return "inf" if math.isinf(x) else x


def _map_json(f: RatMap):
    return {"numerator": [cnum(c) for c in f.num.coeffs], "denominator": [cnum(c) for c in f.den.coeffs]}


# ---------------------------------------------------------------- commands

def _need_map(kind, obj, command):
    if kind != "map":
        raise InputError(f"{command} needs a concrete map, not a symbolic orbit diagram")
    return obj


def _model(kind, obj, is_lattes, args):
    if kind == "symbolic":
        if args.horizon is not None and args.horizon != obj.H:
            return SymbolicModel(obj.nu, obj.generators, obj.landings, H=args.horizon)
        return obj
    kw = {}
    if args.horizon is not None:
        kw["H"] = args.horizon
    if args.tol is not None:
        kw["tol"] = args.tol
    return numeric_model(obj, **kw)


def cmd_analyze(args):
    kind, obj, is_lattes = load_spec(args.spec)
    if kind == "symbolic":
        coll = build_proper(obj)
        return EXIT_OK, {
            "kind": "symbolic",
            "nu": obj.nu,
            "zeta": coll.zeta,
            "N": len(coll),
            "model": obj.to_json(),
            "horizon": obj.H,
        }
    f = obj
    crit = critical_set(f)
    H = args.horizon if args.horizon is not None else 16
    use = crit.finite() if f.is_polynomial else crit
    orbits = [[cnum(z) for z in orbit(f, c, H, snap=config.INF_SNAP)] for c in use.points]
    return EXIT_OK, {
        "kind": "polynomial" if f.is_polynomial else "rational",
        "degree": f.degree,
        "map": _map_json(f),
        "critical_points": [cnum(c) for c in crit.points],
        "multiplicities": list(crit.multiplicities),
        "mu_signature": sorted(crit.multiplicities, reverse=True),
        "nu": use.nu,
        "orbits": orbits,
        "horizon": H,
    }


def cmd_relations(args):
    kind, obj, is_lattes = load_spec(args.spec)
    model = _model(kind, obj, is_lattes, args)
    detected = detect_relations(model)
    coll = build_proper(model)
    out = {
        "kind": model.kind,
        "nu": model.nu,
        "horizon": model.H,
        "detected": [list(r) for r in detected],
        "proper": coll.to_json(),
    }
    if kind == "map":
        out["tol"] = model.tol
    return EXIT_OK, out


def _certify_inputs(args):
    kind, obj, is_lattes = load_spec(args.spec)
    f = _need_map(kind, obj, "certify")
    model = _model(kind, obj, is_lattes, args)
    F = build_proper(model).relations
    chart = parse_chart(args.chart, f)
    if is_lattes and chart == "auto":
        chart = "rat"
    return f, F, chart, model


def cmd_certify(args):
    f, F, chart, model = _certify_inputs(args)
    try:
        cert = certify(f, F, chart)
    except UncertifiableRank as exc:
        rep = exc.report
        return EXIT_UNCERTIFIABLE, {"certified": None, "reason": str(exc),
                                    "jacobian": rep.to_json() if rep is not None else None}
    out = cert.to_json()
    if args.sigma:
        sig = parse_sigma(args.sigma)
        cmp = rank_sigma_independence(f, F, [sig], chart)
        out["sigma"] = {"moebius": [cnum(x) for x in (sig.a, sig.b, sig.c, sig.d)], "rank": cmp.ranks[0],
                        "agrees": cmp.ranks[0] == cert.rank}
    return (EXIT_OK if cert.certified else EXIT_NEGATIVE), out


def cmd_pushforward(args):
    kind, obj, is_lattes = load_spec(args.spec)
    f = _need_map(kind, obj, "pushforward")
    if args.relation:
        rel = parse_relation(args.relation)
        tg = tangent(f, [rel], "rat" if not f.is_polynomial or is_lattes else "poly")
        q = q_relation(tg.map, rel, tg.crit)
        g = tg.map
        source = {"relation": list(rel)}
    else:
        f_, F, chart, model = _certify_inputs(args)
        cert = certify(f_, F, chart)
        if cert.certified:
            raise InputError("the Jacobian has full rank, so there is no kernel differential; pass --relation")
        q = kernel_qdiff(cert.report, cert.kernel)
        g = cert.report.tangent.map
        source = {"kernel_vector": [cnum(a) for a in cert.kernel], "relations": [list(r) for r in F]}
    out = {"source": source, "map_used": _map_json(g), "qdiff": q.to_json()}
    if q.is_zero():
        out["notice"] = "zero differential"
        out["residual"] = 0.0
        return EXIT_OK, out
    samples = sample_points(list(q.poles), args.samples, args.seed)
    out["samples"] = len(samples)
    out["seed"] = args.seed
    out["residual"] = invariance_residual(g, q, samples)
    out["infinity_moments"] = [cnum(m) for m in infinity_moments(q)]
    return EXIT_OK, out


def cmd_lattes_demo(args):
    a = parse_complex(args.a)
    rep = degeneracy_demo(a, n_samples=args.samples, seed=args.seed)
    out = rep.to_json()
    degenerate = rep.rank < rep.N
    out["degenerate"] = degenerate
    return (EXIT_OK if degenerate else EXIT_NEGATIVE), out


def cmd_deficit_check(args):
    kind, obj, is_lattes = load_spec(args.spec)
    f = _need_map(kind, obj, "deficit-check")
    if not args.relation:
        raise InputError("deficit-check needs --relation i,j,m,n")
    rel = parse_relation(args.relation)
    tol = args.tol if args.tol is not None else 1e-5
    chk = deficit_identity_check(f, rel, n_samples=args.samples if args.samples else 10, seed=args.seed)
    return (EXIT_OK if chk.mismatch <= tol else EXIT_NEGATIVE), {
        "relation": list(rel),
        "fixed_point_sent_to_infinity": cnum(chk.normalized.fixed_point),
        "mismatch": chk.mismatch,
        "tol": tol,
        "samples": len(chk.samples),
    }


COMMANDS = {
    "analyze": cmd_analyze,
    "relations": cmd_relations,
    "certify": cmd_certify,
    "pushforward": cmd_pushforward,
    "lattes-demo": cmd_lattes_demo,
    "deficit-check": cmd_deficit_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="transversal", description="Critical relation transversality checks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("spec", help="fixture name, JSON string or JSON file")
        sp.add_argument("--horizon", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=24)
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="pretty", action="store_false", help="JSON output (default)")
        fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented text view")
        sp.set_defaults(pretty=False)
        sp.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical reruns)")

    common(sub.add_parser("analyze", help="degree, critical set and orbits"))
    common(sub.add_parser("relations", help="detected relations and the proper collection"))
    sp = sub.add_parser("certify", help="rank of the relation Jacobian")
    common(sp)
    sp.add_argument("--chart", default="auto", help="rat | poly | family:<num coeffs>[|<den coeffs>]")
    sp.add_argument("--sigma", default=None, help="Moebius a,b,c,d applied to relation values")
    sp = sub.add_parser("pushforward", help="invariance residual of a relation differential")
    common(sp)
    sp.add_argument("--relation", default=None, help="i,j,m,n")
    sp.add_argument("--chart", default="auto")
    sp = sub.add_parser("lattes-demo", help="rank defect and invariant differential of f_a")
    common(sp, spec=False)
    sp.add_argument("--a", default="2", help="Legendre parameter (complex, e.g. 2+0.5i)")
    sp = sub.add_parser("deficit-check", help="identity between Q - f_*Q and critical value partials")
    common(sp)
    sp.add_argument("--relation", default=None, help="i,j,m,n")
    return p


def _pretty(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_short(v)}")
    elif isinstance(obj, list):
        for v in obj:
            lines.append(f"{pad}- {_short(v)}" if _flat(v) else f"{pad}-")
            if not _flat(v):
                lines.extend(_pretty(v, indent + 1))
    return lines


def _flat(v):
    return not isinstance(v, (dict, list)) or all(not isinstance(x, (dict, list)) or
                                                   (isinstance(x, list) and len(x) == 2 and
                                                    all(isinstance(y, float) for y in x))
                                                   for x in (v.values() if isinstance(v, dict) else v))


def _short(v):
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, float) for x in v):
        re, im = v
        return f"{re:.10g}{im:+.10g}i"
    if isinstance(v, list):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    t0 = time.perf_counter()
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("pretty", "timing")}
    code, results = EXIT_INPUT, None
    error = None
    try:
        config.precision()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code, results = COMMANDS[args.command](args)
        notes = sorted({str(w.message) for w in caught})
    except (InputError, ValueError, KeyError, TypeError) as exc:
        error, code, notes = f"{type(exc).__name__}: {exc}", EXIT_INPUT, []
    except UncertifiableRank as exc:
        error, code, notes = str(exc), EXIT_UNCERTIFIABLE, []
    except TransversalError as exc:
        error, code, notes = f"{type(exc).__name__}: {exc}", EXIT_UNCERTIFIABLE, []
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "input": echo,
        "exit_code": code,
        "defaults": {
            "collision_tol": config.COLLISION_TOL,
            "rank_gap": config.RANK_GAP,
            "rank_rtol": config.RANK_RTOL,
            "precision": os.environ.get("TRANSVERSAL_PRECISION", "double"),
        },
    }
    if results is not None:
        report["results"] = results
    if error is not None:
        report["error"] = error
    if notes:
        report["warnings"] = notes
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - t0
    report = _sanitize(report)
    if args.pretty:
        print("\n".join(_pretty(report)))
    else:
        print(json.dumps(report, sort_keys=True))
    return code


def _sanitize(x):
    if isinstance(x, dict):
        return {k: _sanitize(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_sanitize(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return fnum(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return cnum(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
