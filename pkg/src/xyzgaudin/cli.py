"""Command-line interface.

Subcommands
-----------
special     spot-evaluate the elliptic constants and special functions
three-spin  reproduce the three-spin demo tables (couplings, both sectors,
            exact-diagonalization deltas)
acsm        central-spin continuation trace, extrapolation, classical column
verify      run the numerical verification suites, JSON report

Exit codes: 0 success, 2 usage/domain error, 3 numerical failure,
4 verification failure.  All output is deterministic for a fixed
configuration (multi-start randomness is governed by --seed).
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import acsm, bethe, spinops, verify
from .elliptic import jacobi_elliptic, make_context, phi
from .errors import (DomainError, GaudinError, IncompleteEnumerationWarning,
                     PoleProximityError)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _fmt(value, digits):
    return f"{value:.{digits}g}"


def _fmt_complex(value, digits):
    re, im = value.real, value.imag
    scale = max(abs(re), abs(im), 1.0)
    if abs(im) < 1e-13 * scale:
        im = 0.0
    if abs(re) < 1e-13 * scale:
        re = 0.0
    sign = "+" if im >= 0 else "-"
    return f"{_fmt(re, digits)}{sign}{_fmt(abs(im), digits)}i"


def _parse_complex(text):
    try:
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse complex {text!r}") from exc


def _parse_floats(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_ints(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _resolve_output(path):
    if path is None:
        return None
    outdir = os.environ.get("XYZGAUDIN_OUTDIR")
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def _emit(lines, path):
    text = "\n".join(lines) + "\n"
    path = _resolve_output(path)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ----------------------------------------------------------------- special

def cmd_special(args):
    ctx = make_context(args.k)
    d = args.digits
    lines = []
    if args.constants or not args.eval:
        lines.append("k,K,Kprime,q,C")
        lines.append(",".join(_fmt(v, d) for v in
                              (ctx.k, ctx.K, ctx.Kprime, ctx.q, ctx.C)))
    if args.eval:
        lines.append("u,sn,cn,dn,phi1,phi4")
        for u in args.eval:
            # the two families have different pole lattices; report whichever
            # is defined at the point and leave the other blank
            try:
                jac = [_fmt_complex(v, d) for v in jacobi_elliptic(u, ctx)]
            except PoleProximityError:
                jac = ["", "", ""]
            try:
                pv = [_fmt_complex(v, d) for v in phi(u, ctx)]
            except PoleProximityError:
                pv = ["", ""]
            lines.append(",".join([_fmt_complex(u, d)] + jac + pv))
    _emit(lines, args.output)
    return EXIT_OK


# --------------------------------------------------------------- three-spin

def cmd_three_spin(args):
    ctx = make_context(args.k)
    spins = args.spins
    zs = args.z
    if len(spins) != len(zs):
        raise DomainError("--spins and --z must have the same length")
    system = spinops.spin_system(spins, zs, ctx)
    coeffs = [(i, c) for i, c in enumerate(args.coeffs) if i < system.n_sites]
    d = args.digits
    lines = []

    # couplings table, quoted per ordered pair (each bond counted twice in
    # the combination sum), matching the published layout
    pc = spinops.pair_couplings(coeffs, system, per="ordered")
    header, row = [], []
    for (i, j), (jx, jy, jz) in sorted(pc.items()):
        for axis, v in zip("xyz", (jx, jy, jz)):
            header.append(f"H{i + 1}{j + 1}{axis}")
            row.append(_fmt(v, d))
    lines.append("# couplings (per ordered site pair)")
    lines.append(",".join(header))
    lines.append(",".join(row))

    H = spinops.build_hamiltonian(coeffs, system)
    blocks = spinops.parity_split(H, system)
    sectors = (0, 1) if args.sector == "both" else (int(args.sector),)
    incomplete = False
    for l in sectors:
        par = bethe.sector_parity(system, l)
        block = blocks.even_block if par == 1 else blocks.odd_block
        ed = spinops.eigensolve(block)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            sols = bethe.enumerate_solutions(system, l, budget=args.budget,
                                             seed=args.seed)
        if any(issubclass(w.category, IncompleteEnumerationWarning)
               for w in caught):
            incomplete = True
        sols = sorted(sols, key=lambda s: bethe.solution_energy(coeffs, s))
        lines.append(f"# sector l={l} (parity {par:+d}): "
                     f"{len(sols)} of {len(ed)} states")
        m = system.M
        head = ["E"] + [f"lambda{a + 1}" for a in range(m)] + ["E_ed", "delta"]
        lines.append(",".join(head))
        for idx, sol in enumerate(sols):
            energy = bethe.solution_energy(coeffs, sol)
            roots = sol.roots[np.lexsort((sol.roots.imag, sol.roots.real))]
            ed_e = ed[idx] if idx < len(ed) else np.nan
            lines.append(",".join(
                [_fmt(energy, d)] +
                [_fmt_complex(rt, d) for rt in roots] +
                [_fmt(ed_e, d), _fmt(energy - ed_e, 3)]))
    _emit(lines, args.output)
    if incomplete:
        print("warning: enumeration incomplete within budget", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# --------------------------------------------------------------------- acsm

def cmd_acsm(args):
    schedule = args.schedule
    params = acsm.AcsmParams(N=schedule[0], a=args.a, b=args.b, k=args.k)
    trace = acsm.run_continuation(params, schedule=schedule,
                                  budget=args.budget, seed=args.seed)
    d = args.digits
    lines = ["N,lambda1N,min_re,max_re,energy_per_spin,classical_per_spin"]
    for pt in trace.points:
        arc = pt.solution.roots[np.argsort(pt.solution.roots.real)][1:]
        cl = acsm.classical_energy(trace.params_at(pt.N))
        lines.append(",".join([
            str(pt.N),
            _fmt(pt.lambda1 * pt.N, d),
            _fmt(arc.real.min(), d + 2),
            _fmt(arc.real.max(), d + 2),
            _fmt(pt.energy_per_spin, d + 1),
            _fmt(cl, d + 1),
        ]))
    climit = acsm.classical_limit(params)
    if len(trace.points) >= 4:
        ex = {q: acsm.extrapolate(trace, q) for q in
              ("lambda1_n", "min_re", "max_re", "energy_per_spin")}
        lines.append(",".join([
            "inf",
            _fmt(ex["lambda1_n"].limit_value, d),
            _fmt(ex["min_re"].limit_value, d + 2),
            _fmt(ex["max_re"].limit_value, d + 2),
            _fmt(ex["energy_per_spin"].limit_value, d + 1),
            _fmt(climit, d + 1),
        ]))
    else:
        lines.append("# extrapolation skipped: needs at least 4 trace points")
    lines.append(f"# classical_limit,{_fmt(climit, d + 2)}")

    if args.roots_out:
        dump = []
        for pt in trace.points:
            dump.append({
                "N": pt.N,
                "l": 0,
                "roots": [{"re": float(r.real), "im": float(r.imag)}
                          for r in pt.solution.roots],
                "energy": float(pt.energy_per_spin * pt.N),
                "residual": float(pt.solution.residual_norm),
            })
        with open(_resolve_output(args.roots_out), "w") as fh:
            json.dump(dump, fh, indent=1, sort_keys=True)

    if args.excited:
        p0 = trace.params_at(schedule[0])
        targets, matched = acsm.low_excited_states(
            p0, count=args.excited, budget=args.excited_budget, seed=args.seed)
        lines.append(f"# excited states at N={schedule[0]} (sector l=0)")
        lines.append("state,E_ed,found,n_arc,n_detached")
        for ti, tv in enumerate(targets):
            sol = matched.get(ti)
            if sol is None:
                lines.append(f"{ti},{_fmt(tv, d + 2)},0,,")
                continue
            roots = sol.roots
            arc_mask = roots.real > args.b
            lines.append(",".join([
                str(ti), _fmt(tv, d + 2), "1",
                str(int(arc_mask.sum())),
                str(int(len(roots) - arc_mask.sum()))]))
        if args.excited_out:
            dump = []
            for ti, tv in enumerate(targets):
                sol = matched.get(ti)
                if sol is None:
                    continue
                dump.append({
                    "N": schedule[0], "l": 0, "state": ti,
                    "roots": [{"re": float(r.real), "im": float(r.imag)}
                              for r in sol.roots],
                    "energy": float(-sol.r[0]),
                    "residual": float(sol.residual_norm),
                })
            with open(_resolve_output(args.excited_out), "w") as fh:
                json.dump(dump, fh, indent=1, sort_keys=True)

    _emit(lines, args.output)
    return EXIT_OK


# ------------------------------------------------------------------- verify

def cmd_verify(args):
    only = args.only.split(",") if args.only else None
    report = verify.run_checks(only=only, seed=args.seed, budget=args.budget)
    lines = []
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        lines.append(f"{check['name']}: {status} ({check['detail']})")
    lines.append("all checks passed" if report["passed"]
                 else "verification FAILED")
    _emit(lines, args.output)
    if args.json_out:
        with open(_resolve_output(args.json_out), "w") as fh:
            json.dump(report, fh, indent=1, sort_keys=True)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


# ------------------------------------------------------------------ parsing

def _add_common(p):
    p.add_argument("--digits", type=int, default=6,
                   help="significant digits in emitted numbers (default 6)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for multi-start randomness (default 0)")
    p.add_argument("--output", default=None,
                   help="write to this file instead of stdout "
                        "(relative paths resolve under $XYZGAUDIN_OUTDIR)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xyzgaudin",
        description="XYZ Gaudin magnet: elliptic Bethe equations, exact "
                    "diagonalization cross-checks, central-spin continuation")
    parser.add_argument("--config", default=None,
                        help="JSON file with default values for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("special", help="evaluate elliptic constants/functions")
    p.add_argument("--k", type=float, default=0.5)
    p.add_argument("--constants", action="store_true",
                   help="print K, K', q, C")
    p.add_argument("--eval", type=_parse_complex, action="append", default=[],
                   metavar="U", help="complex point like 0.2+0.1i (repeatable)")
    _add_common(p)
    p.set_defaults(handler=cmd_special)

    p = sub.add_parser("three-spin", help="three-spin demo tables")
    p.add_argument("--k", type=float, default=0.5)
    p.add_argument("--z", type=_parse_floats, default=[0.0, 0.2, 0.4])
    p.add_argument("--spins", type=_parse_floats, default=[0.5, 1.0, 1.5])
    p.add_argument("--coeffs", type=_parse_floats, default=[-1.0, -0.5, 0.0],
                   help="combination coefficients c_i of the integrals "
                        "(default -1,-0.5,0; the coupling table is quoted "
                        "per ordered pair)")
    p.add_argument("--sector", choices=["0", "1", "both"], default="both")
    p.add_argument("--budget", type=int, default=120000,
                   help="multi-start attempts per sector")
    _add_common(p)
    p.set_defaults(handler=cmd_three_spin)

    p = sub.add_parser("acsm", help="central-spin continuation pipeline")
    p.add_argument("--a", type=float, default=0.2)
    p.add_argument("--b", type=float, default=0.6)
    p.add_argument("--k", type=float, default=0.5)
    p.add_argument("--schedule", type=_parse_ints,
                   default=list(acsm.DEFAULT_SCHEDULE),
                   help="system sizes, first entry is the seeding size")
    p.add_argument("--budget", type=int, default=600,
                   help="multi-start attempts for the seeding size")
    p.add_argument("--roots-out", default=None,
                   help="dump ground-state roots per N as JSON")
    p.add_argument("--excited", type=int, default=0, metavar="COUNT",
                   help="also survey the lowest COUNT excited states at the "
                        "seeding size")
    p.add_argument("--excited-budget", type=int, default=60000)
    p.add_argument("--excited-out", default=None,
                   help="dump excited-state roots as JSON")
    _add_common(p)
    p.set_defaults(handler=cmd_acsm)

    p = sub.add_parser("verify", help="run the verification suites")
    p.add_argument("--only", default=None,
                   help=f"comma-separated subset of {', '.join(verify.CHECK_NAMES)}")
    p.add_argument("--budget", type=int, default=120000)
    p.add_argument("--json-out", default=None,
                   help="write the machine-readable report here")
    _add_common(p)
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    # apply --config defaults before the real parse
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read --config: {exc}")
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                sp.set_defaults(**{k: v for k, v in overrides.items()
                                   if any(a.dest == k for a in sp._actions)})
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GaudinError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
