"""Scene verification: run every applicable check and grade expectations.

A verification run executes, in order: metric sanity, surface geometry,
torse classification, the prescribed-angle decomposition, the applicable
theorem checks, and family fitting; the result is a JSON-ready report
with every residual and a pass/fail per expectation.

Exit-status contract: 0 all expectations pass, 1 expectation failure,
2 input/validation error, 3 numerical domain error.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import angles, families, surfaces
from .charts import DomainError, GeometryError
from .fields import FieldError
from .gallery import Expectation, GalleryCase
from .jets import JetDomainError
from .scenes import (CompiledScene, Scene, SceneError, compile_scene,
                     expression_grid)
from .surfaces import param_grid

UNIT_TOL = 1e-9
CURVATURE_GRID_CAP = 8
ALIGN_TOL = 1e-8

EXPORT_QUANTITIES = (
    "theta", "f", "B", "K_int", "K_ext", "K_sec", "kappa1", "kappa2",
    "residual_torse", "residual_e12_1", "residual_e12_2",
    "residual_levi_1", "residual_levi_2", "residual_levi_3", "residual_levi_4",
    "residual_dercomp_1", "residual_dercomp_2",
)


class ExpectationFailure(Exception):
    pass


@dataclass
class Bundle:
    """Everything a verification run computes, before grading."""

    compiled: CompiledScene
    grid: np.ndarray
    grid_shape: tuple
    unit_deviation: Optional[float]
    analysis: angles.GridAnalysis
    umbilicity: surfaces.UmbilicityReport
    gauss_max: float
    curvatures: list                  # PACurvatures on the curvature subgrid
    fits: dict                        # kind -> dict(result=..., ...) | dict(skipped=...)
    theorems: dict
    brioschi_mismatch: Optional[float] = None

    @property
    def scene(self):
        return self.compiled.scene

    @property
    def options(self):
        return self.compiled.scene.options


def _point_quantity(p, name):
    if name == "theta":
        return p.theta
    if name == "f":
        return p.f
    if name == "B":
        return p.B
    if name in ("K_int", "K_ext", "K_sec", "kappa1", "kappa2"):
        return getattr(p, name)
    if name == "residual_torse":
        return p.fit.residual
    if name == "residual_e12_1":
        return p.residual_e12[0]
    if name == "residual_e12_2":
        return p.residual_e12[1]
    if name.startswith("residual_levi_"):
        return p.residual_levi[int(name[-1]) - 1]
    if name == "residual_dercomp_1":
        return p.residual_dercomp[0]
    if name == "residual_dercomp_2":
        return p.residual_dercomp[1]
    raise ValueError(
        f"unknown quantity {name!r}; valid names: {', '.join(EXPORT_QUANTITIES)}"
    )


def _fit_samples(bundle: Bundle, quantity):
    """(x, samples) along the middle v-row, oriented along e1.

    Requires the row to be an e1-aligned unit-speed parameter line, which
    holds for every profile the classification theorems address; other
    scenes get a skip note instead of a bogus fit.
    """
    nu, nv = bundle.grid_shape
    if nu < 8:
        return None, None, "fewer than 8 samples along the u-direction"
    j0 = nv // 2
    idx = [i * nv + j0 for i in range(nu)]
    pts = [bundle.analysis.points[i] for i in idx]
    orient = None
    for p in pts:
        if not p.frame_ok:
            return None, None, "frame undefined on the sampling row"
        speed = math.sqrt(p.pg.FF[0, 0])
        if abs(speed - 1.0) > ALIGN_TOL:
            return None, None, "u-lines are not unit speed"
        if abs(p.e1_params[1]) > ALIGN_TOL:
            return None, None, "e1 is not aligned with the u-direction"
        s = 1 if p.e1_params[0] > 0 else -1
        if orient is None:
            orient = s
        elif orient != s:
            return None, None, "e1 flips along the sampling row"
    us = np.array([p.params[0] for p in pts]) * orient
    ys = np.array([_point_quantity(p, quantity) for p in pts], dtype=float)
    if orient < 0:
        us = us[::-1]
        ys = ys[::-1]
    if not np.isfinite(ys).all():
        return None, None, f"{quantity} undefined on the sampling row"
    return us, ys, orient


def _run_fits(bundle: Bundle):
    """Potential-profile fit for totally geodesic surfaces with varying
    angle, and a connection-coefficient fit whenever B is defined."""
    fits = {}
    if (bundle.umbilicity.kind == "totally_geodesic"
            and not bundle.analysis.theta_constant()):
        us, ys, note = _fit_samples(bundle, "f")
        if us is None:
            fits["f"] = {"skipped": note}
        else:
            res = families.family_fit(us, ys, "f")
            fits["f"] = {"result": res, "orientation": note,
                         "u_range": [float(us[0]), float(us[-1])]}
    us, ys, note = _fit_samples(bundle, "B")
    if us is None:
        fits["B"] = {"skipped": note}
    else:
        res = families.family_fit(us, ys, "B")
        fits["B"] = {"result": res, "orientation": note,
                     "u_range": [float(us[0]), float(us[-1])]}
    return fits


def compute_bundle(compiled: CompiledScene, grid_shape=None, tol=None,
                   policy=None, workers=None) -> Bundle:
    scene = compiled.scene
    opts = scene.options
    tol = opts.tolerance if tol is None else tol
    policy = opts.orientation_policy if policy is None else policy
    shape = tuple(grid_shape or scene.grid)
    grid, shape = param_grid(scene.param_domain, shape, opts.grid_margin)

    unit_dev = None
    if compiled.field.declared_unit:
        unit_dev = compiled.field.unit_deviation(grid)
        if unit_dev > UNIT_TOL:
            raise FieldError(
                f"field declared unit but max | |V|^2 - 1 | = {unit_dev:.6e}"
            )

    def make_point(p):
        return angles.PAPoint(compiled.field, p, policy, opts.orientation, tol)

    if workers and workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(make_point, grid))
    else:
        points = [make_point(p) for p in grid]
    thetas = [p.theta for p in points]
    analysis = angles.GridAnalysis(
        points=points,
        theta_min=min(thetas),
        theta_max=max(thetas),
        flip_count=sum(1 for p in points if p.flipped),
        frame_skipped=sum(1 for p in points if not p.frame_ok),
        max_torse_residual=max(p.fit.residual for p in points),
        max_anti_defect=max(p.fit.anti_defect for p in points),
        max_recon=max(p.recon_residual for p in points),
        max_sin_match=max(p.sin_match for p in points),
    )

    umb = surfaces.classify_umbilicity(compiled.immersion, grid, tol,
                                       opts.orientation)

    sub, _ = param_grid(scene.param_domain,
                        [min(s, CURVATURE_GRID_CAP) for s in shape],
                        max(opts.grid_margin, 0.02))
    gauss_max = 0.0
    n = compiled.immersion.n_params
    axes = np.eye(n)
    for p in sub:
        for a in range(n):
            for b in range(n):
                gauss_max = max(gauss_max, surfaces.gauss_formula_check(
                    compiled.immersion, p, axes[a], axes[b], opts.orientation))

    curvatures = []
    brioschi_mismatch = None
    if n == 2:
        devs = []
        for p in sub[:: max(1, len(sub) // 9)]:
            k_int, _, _ = surfaces.three_curvatures(
                compiled.immersion, p, opts.orientation)
            devs.append(abs(surfaces.brioschi_intrinsic(compiled.immersion, p)
                            - k_int))
        brioschi_mismatch = max(devs) if devs else None
    if n == 2 and analysis.frame_skipped == 0:
        for p in sub:
            try:
                curvatures.append(angles.pa_curvatures(
                    compiled.field, compiled.immersion, p, policy,
                    opts.orientation))
            except ValueError:
                pass

    theorems = {
        "principal_direction": angles.principal_direction_test(
            compiled.field, compiled.immersion, grid, policy,
            opts.orientation, tol),
        "theta_extremes": angles.theta_extremes_check(
            compiled.field, compiled.immersion, sub, policy,
            opts.orientation, tol),
        "parallel_theorem": angles.parallel_V_theorem_check(
            compiled.field, compiled.immersion, sub, policy,
            opts.orientation, tol),
        "umbilic_parallel": angles.umbilic_parallel_relations(
            compiled.field, compiled.immersion, sub, policy,
            opts.orientation, tol),
        "concircular_umbilical": _concircular_or_note(compiled, sub, tol),
        "normal_antitorqued": _normal_check_or_note(compiled, sub),
    }

    bundle = Bundle(compiled, grid, shape, unit_dev, analysis, umb, gauss_max,
                    curvatures, {}, theorems, brioschi_mismatch)
    bundle.fits = _run_fits(bundle)
    return bundle


def _concircular_or_note(compiled, grid, tol):
    from .fields import concircular_umbilical_check

    try:
        return concircular_umbilical_check(compiled.field, grid,
                                           compiled.scene.options.orientation,
                                           tol)
    except FieldError as e:
        from .fields import ConcircularUmbilicalReport

        return ConcircularUmbilicalReport(False, str(e))


def _normal_check_or_note(compiled, grid):
    from .fields import umbilical_normal_is_antitorqued_check

    return umbilical_normal_is_antitorqued_check(
        compiled.immersion, grid, compiled.scene.options.orientation)


# -- expectation grading ------------------------------------------------------------


def _max_dev(points, getter, target):
    vals = [getter(p) for p in points]
    vals = [v for v in vals if v is not None]
    if not vals:
        return None
    return max(abs(v - target) for v in vals)


def evaluate_expectation(exp: Expectation, bundle: Bundle) -> dict:
    pts = bundle.analysis.points
    rec = {"id": exp.id, "kind": exp.kind, "tol": exp.tol, "note": exp.note}
    ok = False
    if exp.kind == "umbilicity":
        target = exp.params["target"]
        rec["actual_kind"] = bundle.umbilicity.kind
        rec["max_shape_norm"] = bundle.umbilicity.max_shape_norm
        rec["max_umbilic_dev"] = bundle.umbilicity.max_umbilic_dev
        if target == "totally_geodesic":
            ok = bundle.umbilicity.max_shape_norm <= exp.tol
        elif target == "totally_umbilical":
            ok = (bundle.umbilicity.max_umbilic_dev <= exp.tol
                  and bundle.umbilicity.max_shape_norm > exp.tol)
            if "delta" in exp.params:
                dev = max(abs(bundle.umbilicity.delta_min - exp.params["delta"]),
                          abs(bundle.umbilicity.delta_max - exp.params["delta"]))
                rec["delta_dev"] = dev
                ok = ok and dev <= exp.tol
        else:
            ok = bundle.umbilicity.kind == "neither"
    elif exp.kind == "field_class":
        classes = sorted({p.fit.klass for p in pts})
        rec["actual_classes"] = classes
        ok = classes == [exp.params["target"]]
    elif exp.kind == "f_value":
        dev = _max_dev(pts, lambda p: p.f, exp.params["target"])
        rec["max_dev"] = dev
        ok = dev is not None and dev <= exp.tol
    elif exp.kind in ("f_expr", "theta_expr", "B_expr"):
        quantity = {"f_expr": "f", "theta_expr": "theta", "B_expr": "B"}[exp.kind]
        expected = expression_grid(exp.params["expr"], bundle.scene, bundle.grid)
        dev = None
        for p, target in zip(pts, expected):
            val = _point_quantity(p, quantity)
            if val is None:
                continue
            d = abs(val - target)
            dev = d if dev is None else max(dev, d)
        rec["max_dev"] = dev
        ok = dev is not None and dev <= exp.tol
    elif exp.kind == "theta_value":
        dev = _max_dev(pts, lambda p: p.theta, exp.params["target"])
        rec["max_dev"] = dev
        ok = dev is not None and dev <= exp.tol
    elif exp.kind == "torse_residual":
        rec["max"] = bundle.analysis.max_torse_residual
        ok = rec["max"] <= exp.tol
    elif exp.kind == "anti_defect":
        rec["max"] = bundle.analysis.max_anti_defect
        ok = rec["max"] <= exp.tol
    elif exp.kind in ("K_int_value", "K_sec_value"):
        attr = exp.kind.split("_value")[0]
        dev = _max_dev(pts, lambda p: getattr(p, attr), exp.params["target"])
        rec["max_dev"] = dev
        ok = dev is not None and dev <= exp.tol
    elif exp.kind == "K_ext_max":
        dev = _max_dev(pts, lambda p: p.K_ext, 0.0)
        rec["max_abs"] = dev
        ok = dev is not None and dev <= exp.tol
    elif exp.kind == "kint_b_value":
        devs = [abs(c.K_int_B - exp.params["target"]) for c in bundle.curvatures]
        rec["max_dev"] = max(devs) if devs else None
        ok = bool(devs) and max(devs) <= exp.tol
    elif exp.kind == "kint_routes_agree":
        devs = [c.int_mismatch for c in bundle.curvatures]
        rec["max_dev"] = max(devs) if devs else None
        ok = bool(devs) and max(devs) <= exp.tol
    elif exp.kind == "kext_routes_agree":
        devs = [abs(p.K_ext_formula - p.K_ext) for p in pts
                if p.K_ext_formula is not None]
        rec["max_dev"] = max(devs) if devs else None
        ok = bool(devs) and max(devs) <= exp.tol
    elif exp.kind == "frame_residuals":
        vals = []
        for p in pts:
            if p.frame_ok and not math.isnan(p.residual_e12[0]):
                vals.extend(p.residual_e12)
                vals.extend(p.residual_levi)
        rec["max"] = max(vals) if vals else None
        rec["skipped_points"] = bundle.analysis.frame_skipped
        ok = bool(vals) and max(vals) <= exp.tol
    elif exp.kind == "dercomp_residuals":
        vals = [r for p in pts for r in p.residual_dercomp if not math.isnan(r)]
        rec["max"] = max(vals) if vals else None
        ok = bool(vals) and max(vals) <= exp.tol
    elif exp.kind == "gauss_residual":
        rec["max"] = bundle.gauss_max
        ok = bundle.gauss_max <= exp.tol
    elif exp.kind == "ruled":
        rep = surfaces.ruled_check(bundle.compiled.immersion,
                                   exp.params["axis"], bundle.grid, exp.tol)
        rec["max_residual"] = rep.max_residual
        ok = rep.max_residual <= exp.tol
    elif exp.kind == "theta_extremes":
        case, rep = bundle.theorems["theta_extremes"]
        rec["case"] = case
        rec["report"] = _as_plain(rep)
        if case != exp.params["case"] or not rep.applicable:
            ok = False
        elif case == "right-angle":
            ok = max(rep.max_A_T, rep.max_geodesic, rep.max_det_A) <= exp.tol
        else:
            ok = rep.max_umbilic_dev <= exp.tol
    elif exp.kind == "parallel_theorem":
        rep = bundle.theorems["parallel_theorem"]
        rec["report"] = _as_plain(rep)
        ok = (rep.applicable
              and max(rep.max_A_T, rep.max_geodesic, rep.max_det_A) <= exp.tol)
    elif exp.kind == "umbilic_parallel":
        rep = bundle.theorems["umbilic_parallel"]
        rec["report"] = _as_plain(rep)
        ok = rep.applicable
        if ok:
            kdev = _max_dev(pts, lambda p: p.kappa1, exp.params["kappa"])
            edev = _max_dev(pts, lambda p: p.K_ext, exp.params["K_ext"])
            smax = bundle.analysis.max_over(lambda p: abs(p.K_sec))
            gap = bundle.analysis.max_over(lambda p: abs(p.K_int - p.K_ext))
            rec.update({"kappa_dev": kdev, "K_ext_dev": edev,
                        "K_sec_max": smax, "int_ext_gap": gap})
            ok = (kdev <= exp.tol and edev <= exp.tol
                  and smax <= exp.params["K_sec_max"]
                  and gap <= exp.params["int_ext_gap"]
                  and max(rep.max_kappa_defect, rep.max_B_defect) <= exp.tol
                  and max(rep.max_kint_defect, rep.max_kext_defect,
                          rep.max_ksec_defect) <= exp.tol)
    elif exp.kind == "principal_direction":
        rep = bundle.theorems["principal_direction"]
        rec["report"] = _as_plain(rep)
        ok = rep.applicable and rep.T_principal and rep.max_identity_defect <= exp.tol
    elif exp.kind == "family_fit":
        entry = bundle.fits.get(exp.params["kind"])
        if not entry or "result" not in entry:
            rec["skipped"] = None if not entry else entry.get("skipped")
            ok = False
        else:
            res = entry["result"]
            rec["rms"] = res.rms
            rec["status"] = res.status
            if res.family is None:
                ok = False
            else:
                fam = res.family
                rec["fitted"] = _as_plain(fam)
                ok = res.status == "ok" and res.rms <= exp.tol
                ok = ok and abs(fam.K0 - exp.params["K0"]) <= max(exp.tol, 1e-6)
                if "branch" in exp.params:
                    ok = ok and fam.branch == exp.params["branch"]
                if "hshape" in exp.params and fam.branch == "hyperbolic":
                    ok = ok and fam.hshape == exp.params["hshape"]
                for key in ("c1", "c2", "q"):
                    if key in exp.params:
                        val = getattr(fam, key)
                        ok = ok and val is not None and abs(
                            val - exp.params[key]) <= max(exp.tol, 1e-6)
    elif exp.kind == "concircular_umbilical":
        rep = bundle.theorems["concircular_umbilical"]
        rec["report"] = _as_plain(rep)
        ok = (rep.applicable and rep.max_tangential <= exp.tol
              and rep.max_delta_defect <= exp.tol)
    elif exp.kind == "normal_antitorqued":
        rep = bundle.theorems["normal_antitorqued"]
        rec["report"] = _as_plain(rep)
        ok = rep.max_residual <= exp.tol and rep.max_delta_match <= exp.tol
        if "lam" in exp.params:
            dev = max(abs(rep.lam_min - exp.params["lam"]),
                      abs(rep.lam_max - exp.params["lam"]))
            rec["lam_dev"] = dev
            ok = ok and dev <= exp.tol
    else:
        raise ValueError(f"unknown expectation kind {exp.kind!r}")
    rec["pass"] = bool(ok)
    return rec


# -- report emission -----------------------------------------------------------------


def _as_plain(obj):
    """Recursively convert to JSON-safe plain data; NaN becomes null."""
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _as_plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _as_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_as_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_as_plain(v) for v in obj.tolist()]
    return str(obj)


def build_report(bundle: Bundle, expectation_records, engine_version="0.1.0"):
    a = bundle.analysis
    pts = a.points
    scn = bundle.scene

    def stats(name):
        vals = [_point_quantity(p, name) for p in pts]
        vals = [v for v in vals if v is not None and not math.isnan(v)]
        if not vals:
            return None
        return {"min": min(vals), "max": max(vals)}

    report = {
        "schemaVersion": 1,
        "engineVersion": engine_version,
        "scene": scn.name,
        "gridShape": list(bundle.grid_shape),
        "options": {
            "orientation": scn.options.orientation,
            "orientationPolicy": scn.options.orientation_policy,
            "tolerance": scn.options.tolerance,
            "gridMargin": scn.options.grid_margin,
        },
        "metric": {"positiveDefiniteChecked": True,
                   "points": len(pts)},
        "field": {
            "unitDeviation": bundle.unit_deviation,
            "classes": sorted({p.fit.klass for p in pts}),
            "torqued_test_partial": any(p.fit.torqued_partial for p in pts),
            "maxTorseResidual": a.max_torse_residual,
            "maxAntiTorquedDefect": a.max_anti_defect,
            "f": stats("f"),
        },
        "surface": {
            "umbilicity": _as_plain(bundle.umbilicity),
            "gaussFormulaResidualMax": bundle.gauss_max,
        },
        "pa": {
            "theta": {"min": a.theta_min, "max": a.theta_max},
            "thetaConstant": a.theta_constant(),
            "normalFlips": a.flip_count,
            "frameSkippedPoints": a.frame_skipped,
            "reconstructionResidualMax": a.max_recon,
            "sinThetaMatchMax": a.max_sin_match,
            "residualE12Max": [
                a.max_over(lambda p: p.residual_e12[0], math.nan),
                a.max_over(lambda p: p.residual_e12[1], math.nan),
            ],
            "residualLeviMax": [
                a.max_over(lambda p, i=i: p.residual_levi[i], math.nan)
                for i in range(4)
            ],
            "residualDercompMax": [
                a.max_over(lambda p: p.residual_dercomp[0], math.nan),
                a.max_over(lambda p: p.residual_dercomp[1], math.nan),
            ],
            "B": stats("B"),
        },
        "curvatures": {
            "K_int": stats("K_int"),
            "K_ext": stats("K_ext"),
            "K_sec": stats("K_sec"),
            "bRoutePoints": len(bundle.curvatures),
            "bRouteIntMismatchMax": max(
                (c.int_mismatch for c in bundle.curvatures), default=None),
            "brioschiIntMismatchMax": bundle.brioschi_mismatch,
            "extFormulaMismatchMax": max(
                (abs(p.K_ext_formula - p.K_ext) for p in pts
                 if p.K_ext_formula is not None), default=None),
        },
        "theorems": {
            k: (_as_plain(v) if k != "theta_extremes"
                else {"case": v[0], "report": _as_plain(v[1])})
            for k, v in bundle.theorems.items()
        },
        "families": {
            kind: (
                {"skipped": entry["skipped"]} if "skipped" in entry else {
                    "status": entry["result"].status,
                    "rms": entry["result"].rms,
                    "family": _as_plain(entry["result"].family),
                    "candidates": _as_plain(entry["result"].candidates),
                    "uRange": entry["u_range"],
                }
            )
            for kind, entry in bundle.fits.items()
        },
        "expectations": expectation_records,
        "pass": all(r["pass"] for r in expectation_records),
    }
    return _as_plain(report)


def report_to_json(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def run_verify(case: GalleryCase = None, scene: Scene = None, grid=None,
               tol=None, policy=None, workers=None):
    """Returns (report dict, exit code).  Exactly one of case/scene."""
    try:
        if case is not None:
            scene = case.scene()
        compiled = compile_scene(scene)
        bundle = compute_bundle(compiled, grid_shape=grid, tol=tol,
                                policy=policy, workers=workers)
    except (SceneError, FieldError) as e:
        return {"error": str(e), "exitClass": "validation"}, 2
    except (JetDomainError, DomainError, GeometryError, OverflowError) as e:
        return {"error": str(e), "exitClass": "numerical"}, 3
    records = []
    if case is not None:
        for exp in case.expectations:
            records.append(evaluate_expectation(exp, bundle))
    report = build_report(bundle, records)
    code = 0 if report["pass"] else 1
    return report, code


def export_csv(path_or_buffer, bundle: Bundle, quantity):
    """CSV grid `u,v,<quantity>` in row-major order, 17 significant digits,
    LF line endings.  Undefined values are a hard error."""
    if quantity not in EXPORT_QUANTITIES:
        raise SceneError(
            f"unknown quantity {quantity!r}; valid names: "
            f"{', '.join(EXPORT_QUANTITIES)}"
        )
    lines = [f"u,v,{quantity}"]
    for p in bundle.analysis.points:
        val = _point_quantity(p, quantity)
        if val is None or math.isnan(val):
            where = tuple(float(x) for x in p.params)
            raise GeometryError(
                f"{quantity} undefined at parameter point {where}"
            )
        lines.append(f"{p.params[0]:.17g},{p.params[1]:.17g},{val:.17g}")
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buffer, "write"):
        path_or_buffer.write(text)
    else:
        with open(path_or_buffer, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text
