"""Classification of vector fields along a hypersurface.

Fits, at each point, the decomposition nabla_{e_a} V = f e_a + omega(e_a) V
+ remainder over a tangent orthonormal basis, yielding the potential
function f, the generating form omega on tangent directions, and a class
in {parallel, concircular, antiTorqued, torqued, torseForming, none}.

omega is only estimated on tangent directions: surface data cannot
determine it off-tangent, so the torqued test (omega(V) = 0) is partial
whenever V has a normal component and is flagged as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .charts import GeometryError
from .jets import jet_eval
from .surfaces import Immersion, PointGeometry

TORSE_CLASSES = ("parallel", "concircular", "antiTorqued", "torqued",
                 "torseForming", "none")


class FieldError(ValueError):
    pass


class FieldAlongSurface:
    """A vector field assigned along an immersion, in chart components."""

    def __init__(self, immersion: Immersion, comp_fields, declared_unit=False,
                 name=""):
        self.immersion = immersion
        self.comp_fields = list(comp_fields)
        self.declared_unit = bool(declared_unit)
        self.name = name
        if len(self.comp_fields) != immersion.chart.dim:
            raise ValueError("field needs one component per chart coordinate")
        for fld in self.comp_fields:
            if fld.arity != immersion.n_params:
                raise ValueError("field component arity mismatch")

    def jets_at(self, params):
        return [jet_eval(f, np.asarray(params, dtype=float)) for f in self.comp_fields]

    def values_at(self, params):
        return np.array([j.value for j in self.jets_at(params)])

    def unit_deviation(self, grid) -> float:
        """max | |V|^2 - 1 | over the grid (uses the chart metric)."""
        worst = 0.0
        for p in grid:
            pg = PointGeometry(self.immersion, p)
            V = self.values_at(p)
            worst = max(worst, abs(float(V @ pg.Gc @ V) - 1.0))
        return worst

    def require_unit(self, grid, tol=1e-9):
        dev = self.unit_deviation(grid)
        if dev > tol:
            raise FieldError(
                f"field declared unit but max | |V|^2 - 1 | = {dev:.3e} > {tol:.1e}"
            )
        return dev


@dataclass(frozen=True)
class TorseFit:
    """Per-point torse-forming fit over an orthonormal tangent basis."""

    f: float
    omega: np.ndarray            # omega(e_a)
    residual: float
    klass: str
    anti_defect: float           # max_a |omega(e_a) + f <e_a, V>|
    omega_tangential: float      # omega applied to the tangential part of V
    a_components: np.ndarray
    degenerate_axes: tuple       # axes where V is parallel to e_a (rank-1 span)
    torqued_partial: bool        # normal component present: omega(V) not fully testable
    tol: float


def torse_fit(pg: PointGeometry, field: FieldAlongSurface,
              basis=None, tol=1e-6, rank_tol=1e-9) -> TorseFit:
    """Least-squares decomposition of nabla V in span{e_a, V} per direction.

    ``basis`` holds parameter-coefficient vectors, orthonormal in the
    induced metric; defaults to the metric-orthonormalized coordinate
    basis.  Where V is parallel to some e_a the span degenerates to a
    line; the on-line coefficient then constrains only f + omega(e_a)<e_a,V>,
    so that axis is excluded from the f average and omega(e_a) is imputed
    from the fitted f (this leaves the anti-torqued defect test exact).
    """
    n, Gc, J = pg.n, pg.Gc, pg.J
    if basis is None:
        frame = pg._coordinate_frame()
        basis = [frame[:, a] for a in range(n)]
    basis = [np.asarray(b, dtype=float) for b in basis]
    for a in range(n):
        for b in range(a, n):
            ip = float((J @ basis[a]) @ Gc @ (J @ basis[b]))
            if abs(ip - (1.0 if a == b else 0.0)) > 1e-8:
                raise ValueError("basis not orthonormal in the induced metric")

    jets = field.jets_at(pg.params)
    V = np.array([j.value for j in jets])
    vv = float(V @ Gc @ V)
    if vv < 1e-24:
        raise FieldError(f"vanishing field at {tuple(pg.params)}")

    Dcoord = pg.cov_deriv_expr(jets)
    Dmat = np.array([[c.v for c in vec] for vec in Dcoord])  # [a, k]

    a_vals = np.zeros(n)
    b_vals = np.zeros(n)
    res2 = np.zeros(n)
    m_ev = np.zeros(n)
    degenerate = []
    for a in range(n):
        e_amb = J @ basis[a]
        D = basis[a] @ Dmat
        m_ev[a] = float(e_amb @ Gc @ V)
        p = float(D @ Gc @ e_amb)
        q = float(D @ Gc @ V)
        gram = vv - m_ev[a] ** 2
        if gram <= rank_tol * vv:
            degenerate.append(a)
            a_vals[a] = p
            r = D - p * e_amb
        else:
            sol = np.linalg.solve(
                np.array([[1.0, m_ev[a]], [m_ev[a], vv]]), np.array([p, q])
            )
            a_vals[a], b_vals[a] = sol
            r = D - sol[0] * e_amb - sol[1] * V
        res2[a] = max(float(r @ Gc @ r), 0.0)

    good = [a for a in range(n) if a not in degenerate]
    f = float(np.mean(a_vals[good])) if good else 0.0
    norm_v = math.sqrt(vv)
    for a in degenerate:
        s = math.copysign(1.0, m_ev[a])
        b_vals[a] = s * (a_vals[a] - f) / norm_v

    residual = math.sqrt(res2.sum() + sum((a_vals[a] - f) ** 2 for a in good))
    anti_defect = float(np.abs(b_vals + f * m_ev).max())
    omega_tangential = float(b_vals @ m_ev)

    normal_comp = abs(float(V @ Gc @ pg.N))
    partial = normal_comp > tol
    omega_norm = float(np.abs(b_vals).max())
    if residual > tol:
        klass = "none"
    elif abs(f) <= tol and omega_norm <= tol:
        klass = "parallel"
    elif omega_norm <= tol:
        klass = "concircular"
    elif anti_defect <= tol:
        klass = "antiTorqued"
    elif abs(omega_tangential) <= tol and not partial:
        klass = "torqued"
    else:
        klass = "torseForming"

    return TorseFit(f, b_vals, residual, klass, anti_defect, omega_tangential,
                    a_vals, tuple(degenerate), partial, tol)


# -- grid-level structural checks --------------------------------------------


@dataclass(frozen=True)
class AntiTorquedLemmaReport:
    max_defect: float
    max_torse_residual: float
    points_checked: int


def unit_torse_implies_antitorqued_check(field: FieldAlongSurface, grid,
                                         orientation=+1, tol=1e-6):
    """For a unit torse-forming field, the generating form must satisfy
    omega(X) = -f <X, V>; reports the maximum defect over the grid."""
    field.require_unit(grid)
    max_defect = 0.0
    max_res = 0.0
    for p in grid:
        pg = PointGeometry(field.immersion, p, orientation)
        fit = torse_fit(pg, field, tol=tol)
        max_res = max(max_res, fit.residual)
        max_defect = max(max_defect, fit.anti_defect)
    if max_res > tol:
        raise FieldError(
            f"field is not torse-forming on the grid (residual {max_res:.3e})"
        )
    return AntiTorquedLemmaReport(max_defect, max_res, len(grid))


@dataclass(frozen=True)
class ConcircularUmbilicalReport:
    applicable: bool
    reason: str
    max_tangential: float = math.nan
    max_delta_defect: float = math.nan
    f_min: float = math.nan
    f_max: float = math.nan
    side: int = 0                # +1 if V = +N, -1 if V = -N


def concircular_umbilical_check(field: FieldAlongSurface, grid,
                                orientation=+1, tol=1e-6):
    """A unit concircular field with nonvanishing potential forces V = +-N
    and total umbilicity with factor -side * f; verifies both."""
    field.require_unit(grid)
    max_tan = 0.0
    max_delta = 0.0
    fs = []
    side = 0
    for p in grid:
        pg = PointGeometry(field.immersion, p, orientation)
        fit = torse_fit(pg, field, tol=tol)
        if fit.klass not in ("concircular",):
            return ConcircularUmbilicalReport(
                False, f"field class {fit.klass!r} at {tuple(p)} is not concircular"
            )
        if abs(fit.f) < tol:
            return ConcircularUmbilicalReport(
                False, f"potential below threshold at {tuple(p)} (f = {fit.f:.3e})"
            )
        V = field.values_at(p)
        c = float(V @ pg.Gc @ pg.N)
        s = 1 if c >= 0 else -1
        if side == 0:
            side = s
        elif side != s:
            return ConcircularUmbilicalReport(
                False, f"V switches sides of the normal at {tuple(p)}"
            )
        tang = pg.tangential_part(V)
        max_tan = max(max_tan, pg.ambient_norm(tang))
        kappas = np.array([pp.kappa for pp in pg.principal])
        delta = kappas.mean()
        # V = s N  =>  nabla_X V = -s A(X)  =>  f = -s delta
        max_delta = max(max_delta, float(np.abs(kappas - (-s * fit.f)).max()))
        fs.append(fit.f)
    return ConcircularUmbilicalReport(True, "ok", max_tan, max_delta,
                                      min(fs), max(fs), side)


@dataclass(frozen=True)
class NormalFieldFitReport:
    """Converse direction: the unit normal of a totally umbilical immersion
    fits the concircular / anti-torqued equations with potential -delta."""

    max_residual: float
    lam_min: float
    lam_max: float
    max_delta_match: float       # max |lam + delta|


def normal_field_fit(immersion: Immersion, grid, orientation=+1):
    worst = 0.0
    lams = []
    match = 0.0
    for p in grid:
        pg = PointGeometry(immersion, p, orientation)
        nab = pg.nabla_N                       # [k, a] w.r.t. coordinate dirs
        frame = pg._coordinate_frame()
        lam_vals = []
        residual = 0.0
        for a in range(pg.n):
            e = frame[:, a]
            De = nab @ e
            e_amb = pg.J @ e
            lam_vals.append(float(De @ pg.Gc @ e_amb))
        lam = float(np.mean(lam_vals))
        for a in range(pg.n):
            e = frame[:, a]
            diff = nab @ e - lam * (pg.J @ e)
            residual = max(residual, pg.ambient_norm(diff))
        kappas = np.array([pp.kappa for pp in pg.principal])
        delta = float(kappas.mean())
        match = max(match, abs(lam + delta))
        lams.append(lam)
        worst = max(worst, residual)
    return NormalFieldFitReport(worst, min(lams), max(lams), match)


def umbilical_normal_is_antitorqued_check(immersion: Immersion, grid,
                                          orientation=+1):
    """Along a totally umbilical hypersurface the unit normal acts as a
    unit anti-torqued field: nabla_X N = lam (X - <X,N> N) with lam = -delta.

    Returns the same report as :func:`normal_field_fit`; for tangent X the
    corrective term vanishes, so the defect coincides with the concircular
    residual.
    """
    return normal_field_fit(immersion, grid, orientation)
