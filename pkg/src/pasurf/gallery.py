"""Built-in verification cases.

Each case is a complete scene plus a list of named expectations; the
cases double as regression fixtures and as documentation of what the
engine checks.  ``gallery dump`` exports any of them as a scene file so
users can perturb them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from .scenes import SCHEMA_VERSION, Scene, scene_from_dict


@dataclass(frozen=True)
class Expectation:
    id: str
    kind: str
    tol: float
    note: str
    params: dict = dc_field(default_factory=dict)


@dataclass(frozen=True)
class GalleryCase:
    id: str
    scene_dict: dict
    expectations: tuple

    def scene(self) -> Scene:
        return scene_from_dict(self.scene_dict, name=self.id)


def _euclid3():
    return {
        "coordinates": ["x", "y", "z"],
        "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "domain": {},
    }


def _halfspace3():
    return {
        "coordinates": ["x", "y", "z"],
        "metric": [["1/(z*z)", "0", "0"], ["0", "1/(z*z)", "0"],
                   ["0", "0", "1/(z*z)"]],
        "domain": {"bounds": {"z": [0.0, None]}},
    }


def _phi_over_norm():
    mag = "sqrt(x^2 + y^2 + z^2)"
    return [f"x/{mag}", f"y/{mag}", f"z/{mag}"]


def _hemisphere_case():
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "hemisphere-H3",
        "constants": {"r": 1.0},
        "chart": _halfspace3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["r*cos(asin(sech(u)))*cos(v)",
                    "r*cos(asin(sech(u)))*sin(v)",
                    "r*sech(u)"],
            "domain": [[0.2, 3.0], [0.05, 6.2]],
            "grid": [20, 20],
        },
        "field": {"components": ["0", "0", "-z"], "declaredUnit": True},
        "options": {"orientation": 1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("totally-geodesic", "umbilicity", 1e-7,
                    "hemisphere is totally geodesic in the hyperbolic half-space",
                    {"target": "totally_geodesic"}),
        Expectation("potential-one", "f_value", 1e-7,
                    "the downward radial field has potential 1",
                    {"target": 1.0}),
        Expectation("class-anti-torqued", "field_class", 1e-7,
                    "unit torse-forming field is anti-torqued",
                    {"target": "antiTorqued"}),
        Expectation("torse-residual", "torse_residual", 1e-7,
                    "torse-forming equation holds"),
        Expectation("lemma-defect", "anti_defect", 1e-7,
                    "omega(X) = -f <X, V> on all tangent directions"),
        Expectation("angle-law", "theta_expr", 1e-9,
                    "angle function satisfies cos(theta) = sech(u)",
                    {"expr": "acos(sech(u))"}),
        Expectation("b-coth", "B_expr", 1e-6,
                    "connection coefficient B = coth(u)", {"expr": "coth(u)"}),
        Expectation("kint-b-route", "kint_b_value", 1e-6,
                    "intrinsic curvature -1 from the B-formula", {"target": -1.0}),
        Expectation("kint-routes", "kint_routes_agree", 1e-5,
                    "B-formula and Gauss-equation intrinsic curvatures agree"),
        Expectation("kext-routes", "kext_routes_agree", 1e-6,
                    "extrinsic-curvature formula agrees with det A"),
        Expectation("sectional", "K_sec_value", 1e-6,
                    "ambient sectional curvature -1", {"target": -1.0}),
        Expectation("frame-equations", "frame_residuals", 1e-6,
                    "adapted-frame derivative and connection identities"),
        Expectation("dercomp", "dercomp_residuals", 1e-6,
                    "tangential/normal comparison system"),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
        Expectation("b-family-fit", "family_fit", 1e-5,
                    "B samples fit the K0 = -1 hyperbolic branch",
                    {"kind": "B", "K0": -1.0, "branch": "hyperbolic",
                     "hshape": "coth", "q": 0.0}),
        Expectation("f-family-fit", "family_fit", 1e-5,
                    "constant potential = the c1 = 0 profile with K0 = -1",
                    {"kind": "f", "K0": -1.0, "branch": "constant"}),
    )
    return GalleryCase("hemisphere-H3", scene, exp)


def _cone_case():
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "cone-R3",
        "chart": _euclid3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["u*cos(v)/sqrt(2)", "u*sin(v)/sqrt(2)", "u/sqrt(2)"],
            "domain": [[0.3, 3.0], [0.05, 6.2]],
            "grid": [20, 20],
        },
        "field": {"components": _phi_over_norm(), "declaredUnit": True},
        "options": {"orientation": 1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("right-angle", "theta_value", 1e-9,
                    "radial direction field is tangent: theta = pi/2",
                    {"target": math.pi / 2.0}),
        Expectation("extrinsically-flat", "K_ext_max", 1e-8,
                    "cone is extrinsically flat"),
        Expectation("ruled", "ruled", 1e-8,
                    "rulings through the apex are ambient geodesics",
                    {"axis": 0}),
        Expectation("f-reciprocal", "f_expr", 1e-8,
                    "potential restricts to 1/u", {"expr": "1/u"}),
        Expectation("b-family-fit", "family_fit", 1e-6,
                    "B = 1/u is the K0 = 0 branch with q = 0",
                    {"kind": "B", "K0": 0.0, "branch": "linear", "q": 0.0}),
        Expectation("theta-extreme", "theta_extremes", 1e-8,
                    "theta = pi/2 conclusions: A(T) = 0, geodesic rulings, det A = 0",
                    {"case": "right-angle"}),
        Expectation("class-anti-torqued", "field_class", 1e-8,
                    "unit torse-forming field is anti-torqued",
                    {"target": "antiTorqued"}),
        Expectation("lemma-defect", "anti_defect", 1e-8,
                    "omega(X) = -f <X, V> on all tangent directions"),
        Expectation("kint-b-route", "kint_b_value", 1e-6,
                    "flat intrinsic curvature from the B-formula", {"target": 0.0}),
        Expectation("kext-routes", "kext_routes_agree", 1e-6,
                    "extrinsic-curvature formula agrees with det A"),
        Expectation("frame-equations", "frame_residuals", 1e-6,
                    "adapted-frame identities"),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
    )
    return GalleryCase("cone-R3", scene, exp)


def _cylinder_h3_case():
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "cylinder-H3",
        "chart": _halfspace3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["cos(v)", "sin(v)", "exp(u)"],
            "domain": [[-1.0, 1.0], [0.05, 6.2]],
            "grid": [20, 20],
        },
        "field": {"components": ["0", "0", "-z"], "declaredUnit": True},
        "options": {"orientation": 1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("right-angle", "theta_value", 1e-9,
                    "vertical field is tangent along the cylinder",
                    {"target": math.pi / 2.0}),
        Expectation("potential-one", "f_value", 1e-7,
                    "potential restricts to 1", {"target": 1.0}),
        Expectation("b-family-fit", "family_fit", 1e-6,
                    "constant B branch with K0 = -1",
                    {"kind": "B", "K0": -1.0, "branch": "constant"}),
        Expectation("kint-b-route", "kint_b_value", 1e-6,
                    "intrinsic curvature -1 from the B-formula", {"target": -1.0}),
        Expectation("sectional", "K_sec_value", 1e-6,
                    "ambient sectional curvature -1", {"target": -1.0}),
        Expectation("ruled", "ruled", 1e-7,
                    "vertical rulings are hyperbolic geodesics", {"axis": 0}),
        Expectation("theta-extreme", "theta_extremes", 1e-7,
                    "theta = pi/2 conclusions hold", {"case": "right-angle"}),
        Expectation("class-anti-torqued", "field_class", 1e-7,
                    "unit torse-forming field is anti-torqued",
                    {"target": "antiTorqued"}),
        Expectation("kext-routes", "kext_routes_agree", 1e-6,
                    "extrinsic-curvature formula agrees with det A"),
        Expectation("frame-equations", "frame_residuals", 1e-6,
                    "adapted-frame identities"),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
    )
    return GalleryCase("cylinder-H3", scene, exp)


def _plane_case():
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "plane-z1-R3",
        "chart": _euclid3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["u*cos(v)", "u*sin(v)", "1"],
            "domain": [[0.1, 5.0], [0.05, 6.2]],
            "grid": [20, 20],
        },
        "field": {"components": _phi_over_norm(), "declaredUnit": True},
        "options": {"orientation": 1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("totally-geodesic", "umbilicity", 1e-9,
                    "horizontal plane is totally geodesic",
                    {"target": "totally_geodesic"}),
        Expectation("f-reciprocal-norm", "f_expr", 1e-7,
                    "potential restricts to 1/sqrt(1 + u^2)",
                    {"expr": "1/sqrt(1+u^2)"}),
        Expectation("f-family-fit", "family_fit", 1e-5,
                    "potential fits the K0 = 0 branch with c1 = 1, c2 = 0",
                    {"kind": "f", "K0": 0.0, "branch": "linear",
                     "c1": 1.0, "c2": 0.0}),
        Expectation("angle-law", "theta_expr", 1e-9,
                    "theta = atan(u) in polar coordinates", {"expr": "atan(u)"}),
        Expectation("kint-flat", "K_int_value", 1e-7,
                    "intrinsically flat", {"target": 0.0}),
        Expectation("kint-b-route", "kint_b_value", 1e-7,
                    "flat intrinsic curvature from the B-formula", {"target": 0.0}),
        Expectation("class-anti-torqued", "field_class", 1e-7,
                    "unit torse-forming field is anti-torqued",
                    {"target": "antiTorqued"}),
        Expectation("kext-routes", "kext_routes_agree", 1e-6,
                    "extrinsic-curvature formula agrees with det A"),
        Expectation("frame-equations", "frame_residuals", 1e-6,
                    "adapted-frame identities"),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
    )
    return GalleryCase("plane-z1-R3", scene, exp)


def _sphere_normal_case():
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "sphere-R3-normal",
        "constants": {"r": 2.0},
        "chart": _euclid3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["r*sin(u)*cos(v)", "r*sin(u)*sin(v)", "r*cos(u)"],
            "domain": [[0.2, 2.9], [0.05, 6.2]],
            "grid": [20, 20],
        },
        # inward unit normal of the radius-r sphere
        "field": {"components": ["-x/r", "-y/r", "-z/r"], "declaredUnit": True},
        "options": {"orientation": -1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("theta-zero", "theta_value", 1e-9,
                    "field equals the chosen unit normal", {"target": 0.0}),
        Expectation("umbilical", "umbilicity", 1e-8,
                    "sphere is totally umbilical with factor 1/r",
                    {"target": "totally_umbilical", "delta": 0.5}),
        Expectation("class-concircular", "field_class", 1e-8,
                    "normal field is concircular", {"target": "concircular"}),
        Expectation("potential-inverse-radius", "f_value", 1e-8,
                    "concircular potential is -1/r for the inward normal",
                    {"target": -0.5}),
        Expectation("concircular-umbilical", "concircular_umbilical", 1e-8,
                    "unit concircular field forces V = +-N and delta = -side*f"),
        Expectation("normal-anti-torqued", "normal_antitorqued", 1e-8,
                    "unit normal acts as anti-torqued with potential -delta",
                    {"lam": -0.5}),
        Expectation("theta-extreme", "theta_extremes", 1e-8,
                    "theta = 0 forces total umbilicity", {"case": "normal"}),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
    )
    return GalleryCase("sphere-R3-normal", scene, exp)


def _sphere_parallel_case():
    lo = math.pi / 2.0 + 0.2
    hi = math.pi - 0.2
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "sphere-R3-parallel",
        "constants": {"r": 2.0},
        "chart": _euclid3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["r*sin(u)*cos(v)", "r*sin(u)*sin(v)", "r*cos(u)"],
            "domain": [[lo, hi], [0.05, 6.2]],
            "grid": [20, 20],
        },
        "field": {"components": ["0", "0", "1"], "declaredUnit": True},
        "options": {"orientation": -1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("class-parallel", "field_class", 1e-9,
                    "constant vertical field is parallel", {"target": "parallel"}),
        Expectation("umbilical", "umbilicity", 1e-8,
                    "sphere is totally umbilical with factor 1/r",
                    {"target": "totally_umbilical", "delta": 0.5}),
        Expectation("umbilic-parallel", "umbilic_parallel", 1e-6,
                    "kappa = theta' = 1/r, K_ext = theta'^2, K_sec = 0",
                    {"kappa": 0.5, "K_ext": 0.25, "K_sec_max": 1e-7,
                     "int_ext_gap": 1e-6}),
        Expectation("t-principal", "principal_direction", 1e-6,
                    "tangential part follows the meridian principal direction"),
        Expectation("theta-law", "theta_expr", 1e-9,
                    "theta equals the reflected colatitude", {"expr": "pi - u"}),
        Expectation("kext-routes", "kext_routes_agree", 1e-6,
                    "extrinsic-curvature formula agrees with det A"),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
    )
    return GalleryCase("sphere-R3-parallel", scene, exp)


def _cylinder_parallel_case():
    scene = {
        "schemaVersion": SCHEMA_VERSION,
        "name": "cylinder-R3-parallel",
        "chart": _euclid3(),
        "surface": {
            "parameters": ["u", "v"],
            "map": ["cos(v)", "sin(v)", "u"],
            "domain": [[-1.0, 1.0], [0.05, 6.2]],
            "grid": [20, 20],
        },
        "field": {"components": ["0", "0", "1"], "declaredUnit": True},
        "options": {"orientation": -1, "orientationPolicy": "paper"},
    }
    exp = (
        Expectation("class-parallel", "field_class", 1e-9,
                    "constant vertical field is parallel", {"target": "parallel"}),
        Expectation("right-angle", "theta_value", 1e-9,
                    "vertical field is tangent", {"target": math.pi / 2.0}),
        Expectation("parallel-theorem", "parallel_theorem", 1e-8,
                    "A(T) = 0, T-lines are ambient geodesics, det A = 0"),
        Expectation("not-umbilical", "umbilicity", 1e-6,
                    "cylinder is neither geodesic nor umbilical",
                    {"target": "neither"}),
        Expectation("ruled", "ruled", 1e-10,
                    "vertical rulings are straight lines", {"axis": 0}),
        Expectation("kext-routes", "kext_routes_agree", 1e-6,
                    "extrinsic-curvature formula agrees with det A"),
        Expectation("gauss-formula", "gauss_residual", 1e-6,
                    "Gauss formula projection residual"),
    )
    return GalleryCase("cylinder-R3-parallel", scene, exp)


def gallery():
    """The fixed, ordered list of built-in cases."""
    return [
        _hemisphere_case(),
        _cone_case(),
        _cylinder_h3_case(),
        _plane_case(),
        _sphere_normal_case(),
        _sphere_parallel_case(),
        _cylinder_parallel_case(),
    ]


def gallery_case(case_id) -> GalleryCase:
    for case in gallery():
        if case.id == case_id:
            return case
    known = ", ".join(c.id for c in gallery())
    raise KeyError(f"unknown gallery case {case_id!r}; known cases: {known}")
