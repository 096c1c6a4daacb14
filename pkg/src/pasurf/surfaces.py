"""Extrinsic geometry of an immersed hypersurface.

``PointGeometry`` evaluates, at one parameter point, everything the engine
needs: tangents, unit normal, first/second fundamental forms, shape
operator and principal pairs.  Derived quantities (normal components,
frame vectors) are carried as first-order jets over the surface
parameters, so their derivatives along the surface are exact rather than
finite-differenced.  Only genuinely third-order quantities (derivatives of
shape-operator entries) fall back to finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .charts import AmbientVector, GeometryError, MetricChart, christoffel_arrays
from .jets import Jet1, ScalarField, d1_det, d1_dot, d1_solve, d1_sqrt, jet_eval


class Immersion:
    """A parametrized hypersurface patch in a chart.

    ``map_fields`` holds chart.dim scalar fields of n = chart.dim - 1
    parameters; ``domain`` is the parameter rectangle [(lo, hi), ...].
    """

    def __init__(self, chart: MetricChart, map_fields, domain, name=""):
        self.chart = chart
        self.map_fields = list(map_fields)
        self.domain = [tuple(float(x) for x in pair) for pair in domain]
        self.name = name
        self.n_params = chart.dim - 1
        if len(self.map_fields) != chart.dim:
            raise ValueError("immersion needs one map component per chart coordinate")
        for fld in self.map_fields:
            if fld.arity != self.n_params:
                raise ValueError("map component arity must equal chart.dim - 1")
        if len(self.domain) != self.n_params:
            raise ValueError("parameter rectangle dimension mismatch")

    def geometry_at(self, params, orientation=+1) -> "PointGeometry":
        return PointGeometry(self, params, orientation)


def param_grid(domain, shape, margin_frac=1e-3):
    """Row-major interior grid over a parameter rectangle.

    The margin is a fraction of each parameter range, keeping samples away
    from the patch boundary.
    """
    axes = []
    for (lo, hi), count in zip(domain, shape):
        span = hi - lo
        pad = margin_frac * span
        if count == 1:
            axes.append(np.array([0.5 * (lo + hi)]))
        else:
            axes.append(np.linspace(lo + pad, hi - pad, count))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1), tuple(len(a) for a in axes)


@dataclass(frozen=True)
class PrincipalPair:
    kappa: float
    direction_params: np.ndarray   # unit in the induced metric
    direction: AmbientVector


@dataclass(frozen=True)
class SurfaceGeometry:
    """Per-point extrinsic data in the coordinate tangent basis."""

    first_ff: np.ndarray
    normal: AmbientVector
    shape: np.ndarray              # A^b_a, indexed [b, a]
    second_ff: np.ndarray          # h_ab = <A(d_a), d_b>
    principal: tuple


class PointGeometry:
    """Lazy per-point geometric pipeline (see module docstring)."""

    def __init__(self, immersion: Immersion, params, orientation=+1):
        self.immersion = immersion
        self.chart = immersion.chart
        self.params = np.asarray(params, dtype=float)
        self.orientation = int(orientation)
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")
        self.n = immersion.n_params
        self.d = self.chart.dim
        self._cache = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    # -- raw jets ------------------------------------------------------------

    @property
    def map_jets(self):
        return self._get("map_jets", lambda: [
            jet_eval(f, self.params) for f in self.immersion.map_fields
        ])

    @property
    def x(self):
        return self._get("x", lambda: np.array([j.value for j in self.map_jets]))

    @property
    def J(self):
        return self._get("J", lambda: np.stack([j.grad for j in self.map_jets]))

    @property
    def Hs(self):
        return self._get("Hs", lambda: np.stack([j.hess for j in self.map_jets]))

    @property
    def metric_pack(self):
        def build():
            if not (np.isfinite(self.x).all() and np.isfinite(self.J).all()
                    and np.isfinite(self.Hs).all()):
                raise GeometryError(
                    f"non-finite immersion jets at {tuple(self.params)}"
                )
            self.chart.check_point(self.x)
            return self.chart.metric_jets(self.x)
        return self._get("metric_pack", build)

    @property
    def Gc(self):
        return self.metric_pack[0]

    @property
    def christoffels(self):
        return self._get("christoffels", lambda: christoffel_arrays(*self.metric_pack))

    # -- Jet1 pipeline ---------------------------------------------------------

    @property
    def x1(self):
        return self._get("x1", lambda: [
            Jet1(j.value, tuple(map(float, j.grad))) for j in self.map_jets
        ])

    @property
    def t1(self):
        """Tangent vectors d_a x as Jet1 over the parameters."""
        def build():
            J, Hs = self.J, self.Hs
            return [
                [Jet1(float(J[k, a]), tuple(map(float, Hs[k, a]))) for k in range(self.d)]
                for a in range(self.n)
            ]
        return self._get("t1", build)

    @property
    def g1(self):
        """Chart metric composed with the immersion, with parameter grads."""
        def build():
            G, dG, _ = self.metric_pack
            J = self.J
            out = []
            for i in range(self.d):
                row = []
                for j in range(self.d):
                    grad = dG[i, j] @ J
                    row.append(Jet1(float(G[i, j]), tuple(map(float, grad))))
                out.append(row)
            return out
        return self._get("g1", build)

    @property
    def gamma1(self):
        """Christoffel symbols along the surface as Jet1."""
        def build():
            Gamma, dGamma = self.christoffels
            J = self.J
            dGam = np.einsum("kijm,ma->kija", dGamma, J)
            return [
                [
                    [Jet1(float(Gamma[k, i, j]), tuple(map(float, dGam[k, i, j])))
                     for j in range(self.d)]
                    for i in range(self.d)
                ]
                for k in range(self.d)
            ]
        return self._get("gamma1", build)

    def inner1(self, v, w):
        return d1_dot(self.g1, v, w)

    @property
    def ff1(self):
        def build():
            t = self.t1
            return [[self.inner1(t[a], t[b]) for b in range(self.n)] for a in range(self.n)]
        return self._get("ff1", build)

    @property
    def FF(self):
        def build():
            ff = np.array([[e.v for e in row] for row in self.ff1])
            w = np.linalg.eigvalsh(ff)
            if w[0] < 1e-10:
                raise GeometryError(
                    f"rank-deficient immersion at {tuple(self.params)}: "
                    f"first-fundamental-form eigenvalues {w.tolist()}"
                )
            return ff
        return self._get("FF", build)

    @property
    def normal1(self):
        """Unit normal as Jet1 components (orientation applied)."""
        def build():
            t = self.t1
            d = self.d
            # covector w_m = cofactor expansion of det[e_m | t_1 .. t_n]
            w = []
            for m in range(d):
                minor = [[t[a][k] for a in range(self.n)] for k in range(d) if k != m]
                term = d1_det(minor)
                if m % 2 == 1:
                    term = -term
                w.append(term)
            raised = d1_solve([row[:] for row in self.g1], w)
            norm2 = d1_dot(self.g1, raised, raised)
            if norm2.v <= 0.0:
                raise GeometryError(f"degenerate normal at {tuple(self.params)}")
            inv = 1.0 / d1_sqrt(norm2)
            s = float(self.orientation)
            return [comp * inv * s for comp in raised]
        return self._get("normal1", build)

    @property
    def N(self):
        return self._get("N", lambda: np.array([c.v for c in self.normal1]))

    def cov_deriv_derived(self, W):
        """nabla_{d_a} W for a derived Jet1 vector field; returns floats [k, a]."""
        Gamma, _ = self.christoffels
        J = self.J
        Wv = np.array([c.v for c in W])
        dW = np.array([c.d for c in W])
        return dW + np.einsum("kij,ia,j->ka", Gamma, J, Wv)

    def cov_deriv_expr(self, field_jets):
        """nabla_{d_a} V for a field given by expression jets; Jet1 vectors.

        ``field_jets`` are Jet2 of the chart components over the parameters.
        Result is a list over a of lists over k.
        """
        gam = self.gamma1
        t = self.t1
        V1 = [Jet1(j.value, tuple(map(float, j.grad))) for j in field_jets]
        out = []
        for a in range(self.n):
            vec = []
            for k in range(self.d):
                acc = Jet1(float(field_jets[k].grad[a]),
                           tuple(map(float, field_jets[k].hess[a])))
                for i in range(self.d):
                    for j in range(self.d):
                        acc = acc + gam[k][i][j] * t[a][i] * V1[j]
                vec.append(acc)
            out.append(vec)
        return out

    @property
    def nabla_N(self):
        """Ambient covariant derivative of the unit normal, floats [k, a]."""
        return self._get("nabla_N", lambda: self.cov_deriv_derived(self.normal1))

    @property
    def second_ff(self):
        """h_ab = <A(d_a), d_b> = -<nabla_a N, d_b>, symmetrized."""
        def build():
            h = -np.einsum("ka,kl,lb->ab", self.nabla_N, self.Gc, self.J)
            return 0.5 * (h + h.T)
        return self._get("second_ff", build)

    @property
    def shape_coord(self):
        """Shape operator A^b_a in the coordinate tangent basis, [b, a]."""
        return self._get("shape_coord", lambda: np.linalg.solve(self.FF, self.second_ff))

    @property
    def principal(self):
        def build():
            kappas, vecs = scipy.linalg.eigh(self.second_ff, self.FF)
            tie_tol = 1e-9 * (1.0 + float(np.abs(kappas).max()))
            if self.n == 2 and abs(kappas[1] - kappas[0]) <= tie_tol:
                vecs = self._coordinate_frame()
                kappas = np.array([
                    vecs[:, i] @ self.second_ff @ vecs[:, i] for i in range(self.n)
                ])
            else:
                for i in range(vecs.shape[1]):
                    col = vecs[:, i]
                    for c in col:
                        if abs(c) > 1e-10:
                            if c < 0.0:
                                vecs[:, i] = -col
                            break
            pairs = []
            for i in range(self.n):
                pv = vecs[:, i]
                pairs.append(PrincipalPair(
                    float(kappas[i]), pv.copy(),
                    AmbientVector(self.x, self.J @ pv),
                ))
            return tuple(pairs)
        return self._get("principal", build)

    def _coordinate_frame(self):
        """Gram-Schmidt of the coordinate basis in the induced metric."""
        FF = self.FF
        cols = []
        for a in range(self.n):
            v = np.zeros(self.n)
            v[a] = 1.0
            for c in cols:
                v = v - (c @ FF @ v) * c
            v = v / math.sqrt(v @ FF @ v)
            cols.append(v)
        return np.stack(cols, axis=1)

    def tangential_coeffs(self, w):
        """Coefficients of the tangential projection of ambient comps ``w``."""
        rhs = np.einsum("k,kl,la->a", w, self.Gc, self.J)
        return np.linalg.solve(self.FF, rhs)

    def tangential_part(self, w):
        return self.J @ self.tangential_coeffs(w)

    def ambient_norm(self, w):
        return math.sqrt(max(float(w @ self.Gc @ w), 0.0))

    def surface_geometry(self) -> SurfaceGeometry:
        return SurfaceGeometry(
            first_ff=self.FF,
            normal=AmbientVector(self.x, self.N),
            shape=self.shape_coord,
            second_ff=self.second_ff,
            principal=self.principal,
        )


def surface_geometry(immersion, at, orientation=+1) -> SurfaceGeometry:
    """Shape operator, unit normal and principal pairs at one point."""
    return PointGeometry(immersion, at, orientation).surface_geometry()


def gauss_formula_check(immersion, at, X, Y, orientation=+1) -> float:
    """Residual of nabla_X Y = nabla^S_X Y + <A(X),Y> N for constant
    parameter-coefficient fields X, Y."""
    pg = PointGeometry(immersion, at, orientation)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Gamma, _ = pg.christoffels
    J, Hs = pg.J, pg.Hs
    Yamb = J @ Y
    dY = np.einsum("kab,a->kb", Hs, Y)
    nabXY = dY @ X + np.einsum("kij,i,j->k", Gamma, J @ X, Yamb)
    tang = pg.tangential_part(nabXY)
    hXY = float(Y @ pg.second_ff @ X)
    res = nabXY - tang - hXY * pg.N
    return pg.ambient_norm(res)


def three_curvatures(immersion, at, orientation=+1):
    """(K_int, K_ext, K_sec) of a 2-surface via the structural identity
    K_int = K_sec + K_ext."""
    pg = PointGeometry(immersion, at, orientation)
    if pg.n != 2:
        raise ValueError("three_curvatures requires a 2-parameter immersion")
    k_ext = float(np.linalg.det(pg.shape_coord))
    tu = AmbientVector(pg.x, pg.J[:, 0])
    tv = AmbientVector(pg.x, pg.J[:, 1])
    k_sec = immersion.chart.sectional_curvature(pg.x, tu, tv)
    return k_sec + k_ext, k_ext, k_sec


def brioschi_intrinsic(immersion, at, step=1e-4):
    """Independent intrinsic-curvature route: Brioschi formula on the
    induced metric, second derivatives by central differences of the exact
    first derivatives."""
    at = np.asarray(at, dtype=float)

    def ff_jets(p):
        pg = PointGeometry(immersion, p)
        f = pg.ff1
        return f[0][0], f[0][1], f[1][1]

    E, F, G = ff_jets(at)
    Ev, Eu = E.d[1], E.d[0]
    Fu, Fv = F.d[0], F.d[1]
    Gu, Gv = G.d[0], G.d[1]

    def shift(i, h):
        q = at.copy()
        q[i] += h
        return ff_jets(q)

    Ep, Em = shift(1, step), shift(1, -step)
    Evv = (Ep[0].d[1] - Em[0].d[1]) / (2.0 * step)
    Fp, Fm = shift(0, step), shift(0, -step)
    Fuv = (Fp[1].d[1] - Fm[1].d[1]) / (2.0 * step)
    Guu = (Fp[2].d[0] - Fm[2].d[0]) / (2.0 * step)

    M1 = np.array([
        [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
        [Fv - 0.5 * Gu, E.v, F.v],
        [0.5 * Gv, F.v, G.v],
    ])
    M2 = np.array([
        [0.0, 0.5 * Ev, 0.5 * Gu],
        [0.5 * Ev, E.v, F.v],
        [0.5 * Gu, F.v, G.v],
    ])
    den = (E.v * G.v - F.v * F.v) ** 2
    return (np.linalg.det(M1) - np.linalg.det(M2)) / den


@dataclass(frozen=True)
class UmbilicityReport:
    kind: str                     # totally_geodesic | totally_umbilical | neither
    max_shape_norm: float
    max_umbilic_dev: float
    delta_min: float
    delta_max: float
    tol: float


def classify_umbilicity(immersion, grid, tol=1e-6, orientation=+1) -> UmbilicityReport:
    """Classify by the principal curvatures over a grid of interior points."""
    max_norm = 0.0
    max_dev = 0.0
    deltas = []
    for p in grid:
        pg = PointGeometry(immersion, p, orientation)
        kappas = np.array([pp.kappa for pp in pg.principal])
        delta = float(kappas.mean())
        deltas.append(delta)
        max_norm = max(max_norm, float(np.abs(kappas).max()))
        max_dev = max(max_dev, float(np.abs(kappas - delta).max()))
    if max_norm <= tol:
        kind = "totally_geodesic"
    elif max_dev <= tol:
        kind = "totally_umbilical"
    else:
        kind = "neither"
    return UmbilicityReport(kind, max_norm, max_dev,
                            float(min(deltas)), float(max(deltas)), tol)


@dataclass(frozen=True)
class RuledReport:
    max_residual: float
    ruled: bool
    tol: float


def ruled_check(immersion, ruling_axis, grid, tol=1e-6) -> RuledReport:
    """Geodesic residual of the parameter lines along ``ruling_axis``:
    max over the grid of |nabla_c' c'| / (1 + |c'|^2)."""
    worst = 0.0
    for p in grid:
        pg = PointGeometry(immersion, p)
        Gamma, _ = pg.christoffels
        cp = pg.J[:, ruling_axis]
        cpp = pg.Hs[:, ruling_axis, ruling_axis]
        acc = cpp + np.einsum("kij,i,j->k", Gamma, cp, cp)
        speed2 = float(cp @ pg.Gc @ cp)
        worst = max(worst, pg.ambient_norm(acc) / (1.0 + speed2))
    return RuledReport(worst, worst <= tol, tol)
