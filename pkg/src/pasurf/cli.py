"""Command-line interface.

Subcommands: ``gallery list|dump``, ``verify``, ``export``,
``family eval|fit|oracle``.  Exit status: 0 pass, 1 expectation failure,
2 input/validation error, 3 numerical domain error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import families
from .charts import DomainError, GeometryError
from .fields import FieldError
from .gallery import gallery, gallery_case
from .jets import JetDomainError
from .scenes import SceneError, load_scene
from .verify import (EXPORT_QUANTITIES, compute_bundle, export_csv,
                     report_to_json, run_verify, _as_plain)
from .scenes import compile_scene

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _grid_arg(text):
    try:
        a, b = text.lower().split("x")
        return (int(a), int(b))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like 20x20") from None


def _sign_arg(text):
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError("sign must be + or -")


def _urange_arg(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("u range must look like start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0.0 or stop < start:
        raise argparse.ArgumentTypeError("need stop >= start and step > 0")
    return np.arange(start, stop + 0.5 * step, step)


def _resolve_scene(token):
    """Gallery id or scene-file path -> (case or None, scene)."""
    try:
        case = gallery_case(token)
        return case, case.scene()
    except KeyError:
        pass
    scene = load_scene(token)
    return None, scene


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pasurf",
        description="Verify prescribed-angle surface geometry against its "
                    "structural identities and classification families.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gallery", help="list or dump the built-in cases")
    gsub = g.add_subparsers(dest="gallery_command", required=True)
    gsub.add_parser("list", help="list case ids")
    gd = gsub.add_parser("dump", help="write a case's scene JSON")
    gd.add_argument("id")
    gd.add_argument("--out", default="-")

    v = sub.add_parser("verify", help="run all checks on a case or scene file")
    v.add_argument("target", help="gallery id or scene.json path")
    v.add_argument("--grid", type=_grid_arg, default=None, metavar="AxB")
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--orientation", choices=["paper", "fixed"], default=None)
    v.add_argument("--json", dest="json_out", default=None,
                   help="write the full JSON report here ('-' for stdout)")
    v.add_argument("--workers", type=int, default=None)

    e = sub.add_parser("export", help="export a per-grid-point quantity as CSV")
    e.add_argument("target")
    e.add_argument("--quantity", required=True)
    e.add_argument("--out", required=True, help="output path ('-' for stdout)")
    e.add_argument("--grid", type=_grid_arg, default=None, metavar="AxB")

    f = sub.add_parser("family", help="closed-form family tools")
    fsub = f.add_subparsers(dest="family_command", required=True)

    fe = fsub.add_parser("eval", help="sample a family profile")
    fe.add_argument("--kind", required=True, choices=["F", "f", "B"])
    fe.add_argument("--K0", type=float, required=True)
    fe.add_argument("--c1", type=float, default=None)
    fe.add_argument("--c2", type=float, default=None)
    fe.add_argument("--sign", type=_sign_arg, default=1)
    fe.add_argument("--q", type=float, default=None)
    fe.add_argument("--hshape", choices=["tanh", "coth"], default="tanh")
    fe.add_argument("--u", type=_urange_arg, required=True, metavar="START:STOP:STEP")
    fe.add_argument("--out", default="-")

    ff = fsub.add_parser("fit", help="fit sampled f(u) or B(u) to a branch")
    ff.add_argument("samples", help="CSV file whose first two columns are u, value")
    ff.add_argument("--kind", required=True, choices=["f", "B"])
    ff.add_argument("--rms-tol", type=float, default=1e-3)

    fo = fsub.add_parser("oracle", help="RK4 trace of the linearized profile")
    fo.add_argument("--K0", type=float, required=True)
    fo.add_argument("--u0", type=float, required=True)
    fo.add_argument("--s0", type=float, required=True)
    fo.add_argument("--sp0", type=float, required=True)
    fo.add_argument("--u1", type=float, required=True)
    fo.add_argument("--step", type=float, default=1e-3)
    fo.add_argument("--out", default="-")
    return ap


def _write(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_gallery(args):
    if args.gallery_command == "list":
        for case in gallery():
            print(f"{case.id:24s} {len(case.expectations):2d} expectations")
        return EXIT_OK
    case = gallery_case(args.id)
    _write(json.dumps(case.scene_dict, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_verify(args):
    try:
        case, scene = _resolve_scene(args.target)
    except SceneError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    report, code = run_verify(case=case, scene=scene if case is None else None,
                              grid=args.grid, tol=args.tol,
                              policy=args.orientation, workers=args.workers)
    if "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
        return code
    for rec in report["expectations"]:
        mark = "PASS" if rec["pass"] else "FAIL"
        print(f"{mark}  {report['scene']}: {rec['id']}  ({rec['note']})")
    summary = "pass" if report["pass"] else "FAIL"
    print(f"{report['scene']}: {summary} "
          f"({sum(r['pass'] for r in report['expectations'])}/"
          f"{len(report['expectations'])} expectations)")
    if args.json_out:
        _write(report_to_json(report), args.json_out)
    return code


def _cmd_export(args):
    try:
        _, scene = _resolve_scene(args.target)
        compiled = compile_scene(scene)
        bundle = compute_bundle(compiled, grid_shape=args.grid)
        export_csv(sys.stdout if args.out == "-" else args.out, bundle,
                   args.quantity)
    except (SceneError, FieldError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (JetDomainError, DomainError, GeometryError, OverflowError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_family(args):
    try:
        if args.family_command == "eval":
            kwargs = {"sign": args.sign}
            if args.kind in ("F", "f"):
                if args.c1 is None or args.c2 is None:
                    raise families.AdmissibilityError(
                        f"{args.kind}-family needs --c1 and --c2")
                kwargs.update(c1=args.c1, c2=args.c2)
            else:
                kwargs.update(q=args.q, hshape=args.hshape)
                if args.q is None and args.K0 >= 0.0:
                    raise families.AdmissibilityError("B-family needs --q")
                if args.q is None:
                    kwargs["branch"] = "constant"
                    kwargs.pop("q")
                    kwargs.pop("hshape")
            fam = families.SolutionFamily(args.kind, args.K0, **kwargs)
            lines = ["u,value,d1,d2"]
            for u in args.u:
                val, d1, d2 = families.family_eval(fam, float(u))
                lines.append(f"{u:.17g},{val:.17g},{d1:.17g},{d2:.17g}")
            _write("\n".join(lines) + "\n", args.out)
            return EXIT_OK
        if args.family_command == "fit":
            data = np.loadtxt(args.samples, delimiter=",", skiprows=1, ndmin=2)
            res = families.family_fit(data[:, 0], data[:, 1], args.kind,
                                      rms_tol=args.rms_tol)
            out = {
                "status": res.status,
                "rms": res.rms,
                "family": _as_plain(res.family),
                "candidates": _as_plain(res.candidates),
            }
            print(json.dumps(_as_plain(out), sort_keys=True, indent=2))
            return EXIT_OK if res.status == "ok" else EXIT_EXPECTATION
        trace = families.ode_oracle(args.K0, args.u0, args.s0, args.sp0,
                                    args.u1, args.step)
        lines = ["u,S,Sp"]
        for u, s, sp in zip(trace.us, trace.S, trace.Sp):
            lines.append(f"{u:.17g},{s:.17g},{sp:.17g}")
        _write("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    except (families.AdmissibilityError, families.PoleError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "gallery":
        return _cmd_gallery(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "export":
        return _cmd_export(args)
    return _cmd_family(args)


if __name__ == "__main__":
    sys.exit(main())
