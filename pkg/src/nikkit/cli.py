"""Command-line front end: ``nikkit eval|density|verify|probe|hp``.

``--a1``/``--a2`` are the factor parameters ``A1 < A2`` (not the branch
points ``a_j = (A_j + 1/A_j)/2``, which are derived and printed).

Exit codes: 0 success, 1 numerical/domain/tolerance failure, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from . import branchkit as bk
from . import hermite_pade as hp
from . import identity_lab as lab
from .measures import compose, sigma, sigma2, sigma3
from .quadcauchy import NearSingularityError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("nikkit")


class ConfigError(ValueError):
    pass


def _num(v) -> str:
    return "%.15e" % v


def _pair(text, cast=float):
    try:
        parts = [cast(t) for t in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    return parts


def _point(text):
    parts = _pair(text)
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError("a point is 're' or 're,im'")
    return complex(parts[0], parts[1] if len(parts) == 2 else 0.0)


def _params(args) -> bk.SystemParams:
    try:
        return bk.SystemParams(args.a1, args.a2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _exponents(args) -> bk.FactorExponents:
    if getattr(args, "alpha", None) is not None:
        return bk.conjecture_exponents(args.alpha)
    e = args.exponents
    if len(e) != 2:
        raise ConfigError("--exponents takes two values")
    return bk.FactorExponents(*e)


def _check_common(args):
    if getattr(args, "nodes", 8) < 8:
        raise ConfigError("--nodes must be at least 8")
    if not getattr(args, "tol", 1.0) > 0:
        raise ConfigError("--tol must be positive")


def _emit(args, rows=None, header=None, doc=None):
    """Write CSV (``rows`` with ``header``) or JSON (``doc``) to the output target."""
    buf = io.StringIO()
    if args.format == "csv":
        if rows is None:
            raise ConfigError("this subcommand has no CSV form")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) if isinstance(v, float) else v for v in r])
    else:
        if doc is None:
            doc = [dict(zip(header, r)) for r in rows]
        buf.write(json.dumps(doc, indent=2, allow_nan=True))
        buf.write("\n")
    text = buf.getvalue()
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    p, e = _params(args), _exponents(args)
    points = args.point or [complex(10.0, 0.0)]
    header = ["re_z", "im_z", "re_f", "im_f", "re_f2", "im_f2", "re_f3", "im_f3",
              "re_phi", "im_phi"]
    rows = []
    for z in points:
        if args.side is not None:
            f = complex(bk.boundary_f(p, e, z.real, args.side)) if z.imag == 0 and abs(z.real) < 1 \
                else complex(bk.first_sheet_f(p, e, z, args.side))
            w = complex(bk.boundary_phi(z.real, args.side)) if z.imag == 0 and abs(z.real) < 1 \
                else complex(bk.phi(z))
        else:
            f, w = complex(bk.eval_f(p, e, z)), complex(bk.phi(z))
        rows.append([z.real, z.imag, f.real, f.imag, (f ** 2).real, (f ** 2).imag,
                     (f ** 3).real, (f ** 3).imag, w.real, w.imag])
    _emit(args, rows, header)
    return EXIT_OK


def cmd_density(args) -> int:
    p = _params(args)
    if args.count < 1:
        raise ConfigError("--count must be positive")
    sg, s2m = sigma(p), sigma2(p)
    measures = {
        "sigma": sg,
        "sigma2": s2m,
        "sigma3": sigma3(p),
        "s1": compose(sg, s2m, "positive", args.nodes),
        "s2": compose(sg, compose(s2m, sg, "positive", args.nodes), "positive", args.nodes),
    }
    m = measures[args.measure]
    iv = m.support
    k = np.arange(args.count)
    x = iv.mid - iv.half * np.cos(np.pi * (k + 0.5) / args.count)
    d = np.atleast_1d(m.density(x))
    rows = [[float(a), float(b)] for a, b in zip(x, d)]
    _emit(args, rows, ["x", "density"])
    return EXIT_OK


def _verify_doc(args):
    p = _params(args)
    cfg = lab.VerifyConfig(nodes=args.nodes, tol=args.tol, include_amended=not args.no_amended)
    reports = lab.verify_all(p, cfg)
    doc = {
        "params": {"A1": p.A1, "A2": p.A2, "a1": p.a1, "a2": p.a2, "c_inf": p.c_inf},
        "nodes": args.nodes,
        "tol": args.tol,
        "all_pass": all(r.passed for r in reports),
        "reports": [r.to_json() for r in reports],
        "sign_ledger": lab.sign_ledger(reports),
    }
    return doc, reports


def cmd_verify(args) -> int:
    doc, reports = _verify_doc(args)
    if args.format == "csv":
        header = ["identity", "resolved_signs", "max_residual", "residual_at_half_nodes",
                  "node_count", "grid_size", "pass"]
        rows = [[r.identity, " ".join(str(s) for s in r.resolved_signs), float(r.max_residual),
                 float(r.residual_at_half_nodes), r.node_count, len(r.grid),
                 "true" if r.passed else "false"] for r in reports]
        _emit(args, rows, header)
    else:
        _emit(args, doc=doc)
    for r in reports:
        if not r.passed:
            log.warning("%s: max residual %.3e > tol %.1e", r.identity, r.max_residual, args.tol)
    return EXIT_OK if doc["all_pass"] else EXIT_FAIL


def cmd_probe(args) -> int:
    p, e = _params(args), _exponents(args)
    if args.n < 1:
        raise ConfigError("--n must be at least 1")
    rep = lab.nikishin_probe(p, e, args.n, grid_size=args.grid_size, nodes=args.nodes,
                             tol=args.tol)
    doc = rep.to_json()
    if args.format == "csv":
        header = ["level", "k", "sign", "violations", "reconstruction_residual", "verdict"]
        rows = [[1, d["k"], d["sign"], d["violations"], "", d["verdict"]] for d in doc["level1"]]
        rows += [[2, d["k"], d["jump_sign"], d["violations"], float(d["reconstruction_residual"]),
                  d["reconstruction_verdict"]] for d in doc["level2"]]
        _emit(args, rows, header)
    else:
        _emit(args, doc=doc)
    failed = (rep.level1_violations or rep.level2_violations
              or any(d["reconstruction_verdict"] == "fail" for d in rep.level2))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_hp(args) -> int:
    p, e = _params(args), _exponents(args)
    multi = args.multi
    if any(m < 0 for m in multi) or len(multi) < 2:
        raise ConfigError("--multi needs at least two non-negative degrees")
    try:
        contour = hp.CircleContour(args.radius, args.samples)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = len(multi) - 1
    dps = args.dps if args.dps > 0 else None
    K = max(args.K, sum(m + 1 for m in multi) + max(multi) + 5)
    series = hp.power_series(p, n, e, contour, K, dps)
    res = hp.type_one_hp(series, multi)
    evaluators = [lambda z, j=j: bk.eval_f(p, e, z) ** j for j in range(n + 1)]
    fit = hp.remainder_order(res, evaluators)
    doc = res.to_json()
    doc["remainder_coefficients"] = [float(v) for v in hp.remainder_coefficients(res, series)]
    doc["dps"] = dps
    _emit(args, doc=doc)
    if fit.status == "non_decaying":
        return EXIT_FAIL
    if fit.status == "ok" and fit.order > res.target_order + 0.3:
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_common(p, tol=1e-7, fmt="json"):
    p.add_argument("--a1", type=float, default=1.5, help="factor parameter A1 (> 1)")
    p.add_argument("--a2", type=float, default=3.0, help="factor parameter A2 (> A1)")
    p.add_argument("--exponents", type=_pair, default=[-0.5, -0.5],
                   help="alpha1,alpha2 (default -0.5,-0.5)")
    p.add_argument("--alpha", type=float, default=None, help="use exponents (alpha, -alpha)")
    p.add_argument("--nodes", type=int, default=200, help="quadrature nodes (>= 8)")
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=fmt)
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nikkit",
        description="Evaluate and verify the explicit two-factor Nikishin system. "
                    "--a1/--a2 are the factor parameters A1 < A2, not branch points.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = _add_common(sub.add_parser("eval", help="f, f^2, f^3 and phi at points"))
    p.add_argument("--point", type=_point, action="append",
                   help="re,im (repeatable); default 10,0")
    p.add_argument("--side", choices=("above", "below"), default=None,
                   help="boundary value side for points on a cut")
    p.set_defaults(func=cmd_eval)

    p = _add_common(sub.add_parser("density", help="density table of a measure"), fmt="csv")
    p.add_argument("--measure", choices=("sigma", "sigma2", "sigma3", "s1", "s2"),
                   default="sigma")
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_density)

    p = _add_common(sub.add_parser("verify", help="residuals of all identities"))
    p.add_argument("--no-amended", action="store_true",
                   help="skip the variants that include the rho_2 endpoint poles")
    p.set_defaults(func=cmd_verify)

    p = _add_common(sub.add_parser("probe", help="numerical Nikishin probe for f^1..f^n"), tol=1e-6)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--grid-size", type=int, default=200)
    p.set_defaults(func=cmd_probe)

    p = _add_common(sub.add_parser("hp", help="type-I Hermite-Pade polynomials"))
    p.add_argument("--multi", type=lambda s: _pair(s, int), default=[3, 3, 3])
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--K", type=int, default=60)
    p.add_argument("--dps", type=int, default=40,
                   help="mpmath digits for coefficients and remainder (0: double)")
    p.set_defaults(func=cmd_hp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_common(args)
        p = _params(args)
        log.info("A1=%g A2=%g -> branch points a1=%.12g a2=%.12g", p.A1, p.A2, p.a1, p.a2)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (bk.DomainError, NearSingularityError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
