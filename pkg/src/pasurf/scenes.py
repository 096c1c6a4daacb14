"""Scene files: JSON schema, validation, and compilation to engine objects.

A scene bundles a metric chart, one immersed surface patch, one vector
field along it, and analysis options.  All functional data are expression
strings in the scene grammar; field components may reference the chart
coordinates (the map is spliced in at compile time).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import exprs
from .charts import ChartDomain, MetricChart
from .exprs import ExprError
from .fields import FieldAlongSurface
from .jets import ScalarField
from .surfaces import Immersion

SCHEMA_VERSION = 1

_IDENT_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


class SceneError(ValueError):
    """Scene validation failure (maps to CLI exit status 2)."""


@dataclass
class SceneOptions:
    orientation: int = 1
    orientation_policy: str = "paper"
    tolerance: float = 1e-6
    grid_margin: float = 1e-3     # fraction of each parameter range
    chart_margin: float = 1e-3    # chart units, kept from domain boundaries

    @staticmethod
    def from_dict(d):
        opts = SceneOptions()
        if "orientation" in d:
            if d["orientation"] not in (1, -1):
                raise SceneError("options.orientation must be 1 or -1")
            opts.orientation = int(d["orientation"])
        if "orientationPolicy" in d:
            if d["orientationPolicy"] not in ("paper", "fixed"):
                raise SceneError("options.orientationPolicy must be 'paper' or 'fixed'")
            opts.orientation_policy = d["orientationPolicy"]
        if "tolerance" in d:
            tol = float(d["tolerance"])
            if not (0.0 < tol < 1.0):
                raise SceneError("options.tolerance must lie in (0, 1)")
            opts.tolerance = tol
        if "gridMargin" in d:
            gm = float(d["gridMargin"])
            if not (0.0 <= gm < 0.4):
                raise SceneError("options.gridMargin must lie in [0, 0.4)")
            opts.grid_margin = gm
        if "chartMargin" in d:
            opts.chart_margin = float(d["chartMargin"])
        return opts


@dataclass
class Scene:
    """Validated scene, still at the expression level."""

    name: str
    coordinates: list
    parameters: list
    constants: dict
    metric_exprs: list          # upper triangle, row-major: [(i, j, Expr)]
    bounds: dict                # coord index -> (lo, hi)
    predicates: list            # Exprs in chart coordinates
    map_exprs: list
    param_domain: list
    grid: tuple
    field_exprs: list           # already substituted to parameter-only form
    declared_unit: bool
    options: SceneOptions
    raw: dict = dc_field(repr=False, default_factory=dict)

    @property
    def dim(self):
        return len(self.coordinates)


def _require(cond, message):
    if not cond:
        raise SceneError(message)


def _names_ok(names, what):
    _require(isinstance(names, list) and names, f"{what} must be a non-empty list")
    seen = set()
    for nm in names:
        _require(isinstance(nm, str) and nm and set(nm) <= _IDENT_OK
                 and not nm[0].isdigit(), f"bad identifier {nm!r} in {what}")
        _require(nm not in exprs.FUNCTIONS and nm not in exprs.CONSTANTS,
                 f"{what} name {nm!r} collides with a builtin")
        _require(nm not in seen, f"duplicate name {nm!r} in {what}")
        seen.add(nm)


def _parse_expr(source, names, what):
    _require(isinstance(source, str), f"{what} must be an expression string")
    try:
        return exprs.parse(source, names)
    except ExprError as e:
        raise SceneError(f"{what}: {e}") from None


def scene_from_dict(data: dict, name="scene") -> Scene:
    _require(isinstance(data, dict), "scene must be a JSON object")
    _require(data.get("schemaVersion") == SCHEMA_VERSION,
             f"schemaVersion must be {SCHEMA_VERSION}")
    name = data.get("name", name)

    constants = data.get("constants", {})
    _require(isinstance(constants, dict), "constants must be an object")
    for k, v in constants.items():
        _require(isinstance(v, (int, float)), f"constant {k!r} must be a number")
    if constants:
        _names_ok(list(constants), "constants")

    chart = data.get("chart")
    _require(isinstance(chart, dict), "missing chart section")
    coords = chart.get("coordinates")
    _names_ok(coords, "chart.coordinates")
    dim = len(coords)
    _require(dim >= 2, "chart needs at least 2 coordinates")

    surface = data.get("surface")
    _require(isinstance(surface, dict), "missing surface section")
    params = surface.get("parameters")
    _names_ok(params, "surface.parameters")
    _require(len(params) == dim - 1,
             f"surface needs {dim - 1} parameters for a {dim}-dimensional chart")
    _require(not set(params) & set(coords),
             "parameter names must differ from coordinate names")
    _require(not set(params) & set(constants) and not set(coords) & set(constants),
             "constant names must differ from coordinates and parameters")

    metric = chart.get("metric")
    _require(isinstance(metric, list) and len(metric) == dim
             and all(isinstance(row, list) and len(row) == dim for row in metric),
             f"chart.metric must be a {dim}x{dim} matrix of expressions")
    coord_names = list(coords) + list(constants)
    metric_exprs = []
    for i in range(dim):
        for j in range(i, dim):
            upper = _parse_expr(metric[i][j], coord_names, f"metric[{i}][{j}]")
            if i != j:
                lower = _parse_expr(metric[j][i], coord_names, f"metric[{j}][{i}]")
                _require(exprs.print_expr(upper) == exprs.print_expr(lower),
                         f"metric not symmetric: entries ({i},{j}) and ({j},{i}) differ")
            metric_exprs.append((i, j, upper))

    domain = chart.get("domain", {})
    _require(isinstance(domain, dict), "chart.domain must be an object")
    bounds = {}
    for key, pair in domain.get("bounds", {}).items():
        _require(key in coords, f"domain bound on unknown coordinate {key!r}")
        _require(isinstance(pair, list) and len(pair) == 2,
                 f"domain bound for {key!r} must be [lo, hi] (null = open)")
        lo = None if pair[0] is None else float(pair[0])
        hi = None if pair[1] is None else float(pair[1])
        bounds[coords.index(key)] = (lo, hi)
    predicates = [
        _parse_expr(src, coord_names, f"domain.predicates[{k}]")
        for k, src in enumerate(domain.get("predicates", []))
    ]

    map_sources = surface.get("map")
    _require(isinstance(map_sources, list) and len(map_sources) == dim,
             f"surface.map must list {dim} expressions")
    param_names = list(params) + list(constants)
    map_exprs = [
        _parse_expr(src, param_names, f"surface.map[{k}]")
        for k, src in enumerate(map_sources)
    ]

    rect = surface.get("domain")
    _require(isinstance(rect, list) and len(rect) == dim - 1
             and all(isinstance(p, list) and len(p) == 2 for p in rect),
             "surface.domain must list [lo, hi] per parameter")
    param_domain = []
    for lo, hi in rect:
        lo, hi = float(lo), float(hi)
        _require(math.isfinite(lo) and math.isfinite(hi) and lo < hi,
                 "surface.domain entries must be finite with lo < hi")
        param_domain.append((lo, hi))

    grid = surface.get("grid", [20, 20])
    _require(isinstance(grid, list) and len(grid) == dim - 1
             and all(isinstance(g, int) and g >= 1 for g in grid),
             "surface.grid must list positive integers per parameter")

    fld = data.get("field")
    _require(isinstance(fld, dict), "missing field section")
    comp_sources = fld.get("components")
    _require(isinstance(comp_sources, list) and len(comp_sources) == dim,
             f"field.components must list {dim} expressions")
    mapping = dict(zip(coords, map_exprs))
    field_exprs = []
    for k, src in enumerate(comp_sources):
        ast = _parse_expr(src, list(params) + list(coords) + list(constants),
                          f"field.components[{k}]")
        field_exprs.append(exprs.substitute(ast, mapping))
    declared_unit = bool(fld.get("declaredUnit", False))

    options = SceneOptions.from_dict(data.get("options", {}))

    return Scene(name, list(coords), list(params), dict(constants), metric_exprs,
                 bounds, predicates, map_exprs, param_domain, tuple(grid),
                 field_exprs, declared_unit, options, raw=data)


def load_scene(path) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise SceneError(f"cannot read scene file: {e}") from None
    except json.JSONDecodeError as e:
        raise SceneError(f"scene file is not valid JSON: {e}") from None
    return scene_from_dict(data)


@dataclass
class CompiledScene:
    scene: Scene
    chart: MetricChart
    immersion: Immersion
    field: FieldAlongSurface


def compile_scene(scene: Scene) -> CompiledScene:
    dim = scene.dim
    coord_names = scene.coordinates
    grid_rows = [[None] * dim for _ in range(dim)]
    for i, j, e in scene.metric_exprs:
        fldij = exprs.compile_field(e, coord_names, scene.constants,
                                    name=exprs.print_expr(e))
        grid_rows[i][j] = fldij
        grid_rows[j][i] = fldij
    predicates = tuple(
        exprs.compile_field(e, coord_names, scene.constants,
                            name=exprs.print_expr(e))
        for e in scene.predicates
    )
    chart = MetricChart(
        dim, grid_rows,
        ChartDomain(scene.bounds, predicates, scene.options.chart_margin),
        name=scene.name,
    )
    map_fields = [
        exprs.compile_field(e, scene.parameters, scene.constants)
        for e in scene.map_exprs
    ]
    immersion = Immersion(chart, map_fields, scene.param_domain, name=scene.name)
    comp_fields = [
        exprs.compile_field(e, scene.parameters, scene.constants)
        for e in scene.field_exprs
    ]
    fld = FieldAlongSurface(immersion, comp_fields, scene.declared_unit,
                            name=scene.name)
    return CompiledScene(scene, chart, immersion, fld)


def expression_grid(source, scene: Scene, grid_points):
    """Evaluate a u,v-expression (plus scene constants) on grid points."""
    ast = _parse_expr(source, list(scene.parameters) + list(scene.constants),
                      "expected-value expression")
    fldx = exprs.compile_field(ast, scene.parameters, scene.constants)
    return np.array([fldx.eval(p).value for p in grid_points])
