"""Command-line front end: ``partial-theta <command> [options]``.

Exit codes: 0 success, 1 certification failure (or a failing bench item),
2 usage error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys

from . import interval as iv
from .interval import CRect, abs_bounds, format_rint, make

EXIT_OK, EXIT_CERT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^\s*(?P<re>[+-]?{_NUM})?\s*(?:(?P<sign>[+-])\s*(?P<im>{_NUM})?\s*[ij])?\s*$")
_IMAG_RE = re.compile(rf"^\s*(?P<im>[+-]?{_NUM})?\s*[ij]\s*$")


class UsageError(ValueError):
    pass


def parse_complex(text: str) -> CRect:
    """Exact rectangle for "a", "a+bi", "a-bi", "bi" (decimal endpoints kept exact)."""
    t = text.strip().replace(" ", "")
    m = _COMPLEX_RE.match(t)
    if not m or (m.group("re") is None and m.group("sign") is None):
        pure = _IMAG_RE.match(t)
        if pure is None:
            raise UsageError(f"cannot parse complex number {text!r}")
        return CRect(make(0), make(pure.group("im") or "1"))
    re_part = make(m.group("re") or "0")
    if m.group("sign") is None:
        return CRect(re_part, make(0))
    im = m.group("im") or "1"
    if m.group("sign") == "-":
        im = "-" + im
    return CRect(re_part, make(im))


def parse_polar(text: str) -> CRect:
    """"r:angle" with the angle in units of pi, optionally suffixed by "pi"."""
    try:
        r, ang = text.split(":")
    except ValueError:
        raise UsageError(f"polar input must be r:angle, got {text!r}") from None
    ang = ang.strip()
    if ang.endswith("pi"):
        ang = ang[:-2]
    elif ang.endswith("π"):
        ang = ang[:-1]
    try:
        return CRect.polar(make(r), make(ang or "1"))
    except (ValueError, ArithmeticError):
        raise UsageError(f"cannot parse polar input {text!r}") from None


def parse_real_or_range(text: str):
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return make(lo, hi)
        return make(text)
    except (ValueError, ArithmeticError):
        raise UsageError(f"cannot parse real value {text!r}") from None


def parse_q_range(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError("--q must be lo:hi")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"cannot parse q range {text!r}") from None
    if not 0 < lo < hi < 1:
        raise UsageError("certification needs 0 < q_lo < q_hi < 1")
    return parts[0], parts[1]


def _join_negative_values(argv):
    """Let ``--x -0.5+2i`` work by rewriting it as ``--x=-0.5+2i``."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok.startswith("--") and "=" not in tok and nxt is not None and len(nxt) > 1
                and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _fmt_rect(z: CRect, digits: int) -> str:
    if z.im.lo == 0 and z.im.hi == 0:
        return format_rint(z.re, digits)
    return f"({format_rint(z.re, digits)}) + ({format_rint(z.im, digits)})i"


def _rint_json(x):
    return iv.rint_to_decimals(x)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- commands ---------------------------------------------------------------------

def cmd_eval(args) -> int:
    from . import series
    from .product import theta_star
    q = parse_real_or_range(args.q)
    if args.x is not None and args.x_polar is not None:
        raise UsageError("give either --x or --x-polar")
    if args.x is None and args.x_polar is None:
        raise UsageError("one of --x or --x-polar is required")
    x = parse_complex(args.x) if args.x is not None else parse_polar(args.x_polar)
    target = float(args.target)
    funcs = {
        "theta": series.theta, "dx": series.theta_dx, "dxx": series.theta_dxx,
        "dq": series.theta_dq, "dxq": series.theta_dxq,
    }
    if args.function in funcs:
        res = funcs[args.function](q, x, target=target, terms=args.terms)
        enc, terms, tail = res.enclosure, res.terms_used, res.tail_bound
    elif args.function == "G":
        res = series.G(q, x, target=target)
        enc, terms, tail = res.enclosure, res.terms_used, res.tail_bound
    else:
        res = theta_star(q, x, target=target)
        enc, terms, tail = res.enclosure, res.factors_used, res.tail_factor
    digits = max(args.digits, 1)
    if args.json:
        out = {"function": args.function, "q": _rint_json(q), "x": [_rint_json(x.re), _rint_json(x.im)],
               "re": _rint_json(enc.re), "im": _rint_json(enc.im), "terms_used": terms,
               "tail_bound": _rint_json(tail)}
        if args.abs:
            out["abs"] = _rint_json(abs_bounds(enc))
        print(json.dumps(out, indent=1))
        return EXIT_OK
    print(format_rint(abs_bounds(enc), digits) if args.abs else _fmt_rect(enc, digits))
    if args.verbose:
        print(f"terms_used: {terms}")
        print(f"tail_bound: {format_rint(tail, 6)}")
    return EXIT_OK


def cmd_certify(args) -> int:
    from .certify import (CertConfig, audit, cert_to_dict, cert_to_json, certify_no_zeros,
                          certify_positive_on_segment, region_path)
    lo, hi = parse_q_range(args.q)
    try:
        path = region_path(args.region)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = CertConfig(precision=args.precision, grid=args.grid, depth_cap=args.depth_cap,
                     max_cells=args.max_cells, threads=args.threads)
    if args.positive:
        if not args.region.startswith("segment:"):
            raise UsageError("--positive applies to segment regions only")
        _, a, b = args.region.split(":")
        cert = certify_positive_on_segment(float(a), float(b), (lo, hi), cfg)
    else:
        cert = certify_no_zeros(path, (lo, hi), cfg)
    audited = None
    if args.audit and cert.certified:
        audited = audit(cert, threads=args.threads)
    if args.out:
        _write(args.out, cert_to_json(cert) + "\n")
    if args.json:
        d = cert_to_dict(cert)
        if audited is not None:
            d["audit"] = audited
        if args.out:
            d = {k: v for k, v in d.items() if k not in ("cells",)}
            d["cells_written_to"] = args.out
            d["cell_count"] = len(cert.cells)
        print(json.dumps(d, indent=1))
    else:
        print(f"region: {cert.region}")
        print(f"q: [{args.q.replace(':', ', ')}]")
        print(f"status: {cert.status}")
        print(f"cells: {len(cert.cells)}")
        if cert.cells:
            worst = min(c.lb for c in cert.cells)
            print(f"min lower bound: {iv.to_decimal(worst, 6, 'floor')}")
        if audited is not None:
            print(f"audit: {'ok' if audited else 'FAILED'}")
        if cert.failures:
            print(f"failures: {len(cert.failures)}")
            for f in cert.failures[: args.show_failures]:
                print(f"  {f.piece} q={iv.format_rint(f.q, 8)} s={iv.format_rint(f.s, 8)} {f.reason}")
    ok = cert.certified and audited is not False
    return EXIT_OK if ok else EXIT_CERT_FAIL


def cmd_zeros(args) -> int:
    from .zeros import zeros_in_box
    try:
        q = float(args.q)
    except ValueError:
        raise UsageError(f"bad --q {args.q!r}") from None
    try:
        found = zeros_in_box(q, args.box, rigorous=args.rigorous)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    found = sorted(found, key=lambda t: (t[0].real, t[0].imag))
    if args.json:
        rows = []
        for t in found:
            row = {"re": f"{t[0].real:.17g}", "im": f"{t[0].imag:.17g}", "residual": f"{t[1]:.3g}"}
            if args.rigorous:
                row["certified_count"] = t[2]
            rows.append(row)
        print(json.dumps({"q": args.q, "box": args.box, "zeros": rows}, indent=1))
    else:
        print(f"zeros: {len(found)}")
        for t in found:
            line = f"{t[0].real:+.15f} {t[0].imag:+.15f}i  residual {t[1]:.2e}"
            if args.rigorous:
                line += f"  certified_count {t[2]}"
            print(line)
    if args.rigorous and any(t[2] != 1 for t in found):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_trace(args) -> int:
    from .zeros import trace_branch, trajectory_csv
    seed = parse_complex(args.seed).mid()
    traj = trace_branch(float(args.q_from), float(args.q_to), seed, step=args.step, min_step=args.min_step)
    csv = trajectory_csv([traj])
    if args.out:
        _write(args.out, csv)
    if args.json:
        print(json.dumps({"status": traj.status, "samples": [
            {"q": f"{q:.17g}", "re": f"{z.real:.17g}", "im": f"{z.imag:.17g}", "residual": f"{r:.3g}"}
            for q, z, r in traj.samples]}, indent=1))
    elif not args.out:
        sys.stdout.write(csv)
    else:
        print(f"status: {traj.status}, samples: {len(traj.samples)}")
    return EXIT_OK if traj.status == "complete" else EXIT_NUMERIC


def cmd_spectral(args) -> int:
    from .zeros import spectral_json, spectral_values
    if args.count < 1:
        raise UsageError("--count must be positive")
    vals = spectral_values(args.count, threads=args.threads)
    text = spectral_json(vals)
    if args.out:
        _write(args.out, text + "\n")
    if args.json:
        print(text)
    else:
        for v in vals:
            print(f"{v.j} {v.q:.12f} {v.z.real:.10f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import FAIL, all_pass, plot_data, run_all, to_tsv
    items = run_all(threads=args.threads)
    if args.plot_data:
        _write(args.plot_data, plot_data())
    if args.json:
        print(json.dumps([it.__dict__ for it in items], indent=1))
    else:
        tsv = to_tsv(items)
        if args.out:
            _write(args.out, tsv)
        else:
            sys.stdout.write(tsv)
        if args.verbose:
            for it in items:
                if it.note:
                    print(f"# {it.id}: {it.note}", file=sys.stderr)
    failing = [it.id for it in items if it.status == FAIL]
    if failing:
        print("failing: " + ", ".join(failing), file=sys.stderr)
    return EXIT_OK if all_pass(items) else EXIT_CERT_FAIL


# -- parser -------------------------------------------------------------------------

def _default_precision():
    env = os.environ.get("THETA_PRECISION_BITS")
    if env is None:
        return 128
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"THETA_PRECISION_BITS must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--precision", type=int, default=None,
                        help="working precision in bits (default 128 or $THETA_PRECISION_BITS)")
    common.add_argument("--threads", type=int, default=0, help="worker processes (0 = all cores)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="partial-theta",
                                description="Rigorous numerics for the partial theta function.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="enclose theta or a companion series")
    e.add_argument("--q", required=True, help="real q or interval lo:hi")
    e.add_argument("--x", help="complex x as a+bi")
    e.add_argument("--x-polar", help="complex x as r:angle (angle in units of pi, e.g. 3:0.75pi)")
    e.add_argument("--function", default="theta", choices=["theta", "dx", "dxx", "dq", "dxq", "G", "theta_star"])
    e.add_argument("--target", default="1e-30", help="absolute truncation target")
    e.add_argument("--terms", type=int, default=None, help="fixed truncation degree")
    e.add_argument("--abs", action="store_true", help="print the modulus enclosure")
    e.add_argument("--digits", type=int, default=20)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("certify", parents=[common], help="certify a zero-free region")
    c.add_argument("--region", required=True, help="D, Delta, or segment:a:b")
    c.add_argument("--q", default="0.02:0.98", help="q window lo:hi")
    c.add_argument("--out", help="write the certificate JSON here")
    c.add_argument("--grid", type=int, default=8)
    c.add_argument("--depth-cap", type=int, default=40)
    c.add_argument("--max-cells", type=int, default=2_000_000)
    c.add_argument("--positive", action="store_true", help="prove theta > 0 on the segment")
    c.add_argument("--audit", action="store_true", help="re-verify the certificate before exiting")
    c.add_argument("--show-failures", type=int, default=20)
    c.set_defaults(func=cmd_certify)

    z = sub.add_parser("zeros", parents=[common], help="zeros of theta(q, .) in a box")
    z.add_argument("--q", required=True)
    z.add_argument("--box", required=True, help="x0:x1:y0:y1")
    z.add_argument("--rigorous", action="store_true", help="certify each zero with a winding count")
    z.set_defaults(func=cmd_zeros)

    t = sub.add_parser("trace", parents=[common], help="follow a zero as q varies")
    t.add_argument("--q-from", required=True)
    t.add_argument("--q-to", required=True)
    t.add_argument("--seed", required=True, help="starting zero estimate a+bi")
    t.add_argument("--step", type=float, default=1e-3)
    t.add_argument("--min-step", type=float, default=1e-6)
    t.add_argument("--out", help="write the trajectory CSV here")
    t.set_defaults(func=cmd_trace)

    s = sub.add_parser("spectral", parents=[common], help="spectral values (double real zeros)")
    s.add_argument("--count", type=int, default=6)
    s.add_argument("--out", help="write JSON here")
    s.set_defaults(func=cmd_spectral)

    b = sub.add_parser("bench", parents=[common], help="reproduce the published constants")
    b.add_argument("--out", help="write the TSV table here")
    b.add_argument("--plot-data", help="write |K| and M1 samples as CSV here")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    from .series import DomainError, NonConvergence, TailStall
    from .zeros import BoundaryZero, BracketingFailure, NoConvergence
    try:
        prec = args.precision if args.precision is not None else _default_precision()
        if prec < 64:
            raise UsageError("precision must be at least 64 bits")
        args.precision = prec
        with iv.working_precision(prec):
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergence, TailStall, DomainError, NoConvergence, BoundaryZero, BracketingFailure,
            ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
