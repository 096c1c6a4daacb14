"""Ambient Riemannian geometry on a single coordinate chart.

A :class:`MetricChart` owns the metric components as scalar fields of the
chart coordinates and derives Christoffel symbols, the curvature tensor,
sectional curvature and covariant derivatives of vector fields along
parametrized maps.  Charts are immutable; every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .jets import ScalarField, jet_eval


class GeometryError(ValueError):
    """Hard numerical failure (non-SPD metric, degenerate section, ...)."""


class DomainError(ValueError):
    """A sampled point violates the chart's declared domain."""


@dataclass(frozen=True)
class ChartDomain:
    """Box constraints plus nonnegativity predicates, with a safety margin."""

    bounds: dict = field(default_factory=dict)  # coord index -> (lo, hi), None = open
    predicates: tuple = ()                      # ScalarFields required > margin
    margin: float = 1e-3

    def check(self, point):
        for i, (lo, hi) in self.bounds.items():
            x = point[i]
            if lo is not None and x < lo + self.margin:
                raise DomainError(
                    f"coordinate {i} = {x!r} below bound {lo!r} (margin {self.margin})"
                )
            if hi is not None and x > hi - self.margin:
                raise DomainError(
                    f"coordinate {i} = {x!r} above bound {hi!r} (margin {self.margin})"
                )
        for pred in self.predicates:
            if pred.eval(point).value <= self.margin:
                raise DomainError(
                    f"domain predicate {pred.name!r} non-positive at {tuple(point)}"
                )


@dataclass(frozen=True)
class MetricValue:
    g: np.ndarray
    inverse: np.ndarray
    cholesky: np.ndarray


@dataclass(frozen=True)
class AmbientVector:
    """Tangent vector at ``base``, components in the chart coordinate frame."""

    base: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))


def _same_base(*vectors):
    base = vectors[0].base
    for v in vectors[1:]:
        if not np.array_equal(v.base, base):
            raise ValueError("ambient vectors based at different points")
    return base


class MetricChart:
    """An (n+1)-dimensional chart with symmetric positive definite metric.

    Only the upper triangle of the component matrix is stored; symmetry is
    structural.  ``dim`` is the ambient dimension n+1.
    """

    def __init__(self, dim: int, components, domain: Optional[ChartDomain] = None,
                 name: str = ""):
        self.dim = dim
        self.name = name
        self.domain = domain or ChartDomain()
        self._upper = {}
        for i in range(dim):
            for j in range(i, dim):
                self._upper[(i, j)] = components[i][j]
        for i in range(dim):
            for j in range(dim):
                fld = self.component(i, j)
                if fld.arity != dim:
                    raise ValueError("metric component arity mismatch")

    def component(self, i, j) -> ScalarField:
        return self._upper[(i, j) if i <= j else (j, i)]

    def check_point(self, point):
        self.domain.check(np.asarray(point, dtype=float))

    # -- metric and derivatives ---------------------------------------------

    def metric_jets(self, point):
        """(G, dG, d2G) with dG[i,j,k] = d_k g_ij and d2G[i,j,k,l] = d_k d_l g_ij."""
        d = self.dim
        G = np.zeros((d, d))
        dG = np.zeros((d, d, d))
        d2G = np.zeros((d, d, d, d))
        p = np.asarray(point, dtype=float)
        for (i, j), fld in self._upper.items():
            jet = jet_eval(fld, p)
            G[i, j] = G[j, i] = jet.value
            dG[i, j] = dG[j, i] = jet.grad
            d2G[i, j] = d2G[j, i] = jet.hess
        return G, dG, d2G

    def metric_at(self, point) -> MetricValue:
        """Metric value with inverse and Cholesky factor; hard error off SPD."""
        self.check_point(point)
        G, _, _ = self.metric_jets(point)
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise GeometryError(
                f"metric not positive definite at {tuple(np.asarray(point))}"
            ) from None
        inv = np.linalg.inv(G)
        return MetricValue(G, inv, L)

    def inner(self, v: AmbientVector, w: AmbientVector) -> float:
        base = _same_base(v, w)
        G, _, _ = self.metric_jets(base)
        return float(v.components @ G @ w.components)

    def norm(self, v: AmbientVector) -> float:
        return math.sqrt(max(self.inner(v, v), 0.0))

    def christoffel(self, point) -> np.ndarray:
        """Levi-Civita symbols Gamma[k,i,j], symmetric in (i, j)."""
        return self.christoffel_partials(point)[0]

    def christoffel_partials(self, point):
        """(Gamma, dGamma) with dGamma[k,i,j,m] = d_m Gamma^k_ij.

        Needs metric jets up to second order only.
        """
        self.check_point(point)
        return christoffel_arrays(*self.metric_jets(point))

    # -- curvature ------------------------------------------------------------

    def riemann_components(self, point):
        """R[l,k,i,j] with R(d_i, d_j) d_k = R[l,k,i,j] d_l.

        Convention: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
        - nabla_[X,Y] Z, so the hyperbolic half-space comes out with
        sectional curvature -1.
        """
        Gamma, dGamma = self.christoffel_partials(point)
        R = (
            dGamma.transpose(0, 2, 3, 1)  # d_i Gamma^l_jk -> [l,k,i,j]
            - dGamma.transpose(0, 2, 1, 3)
            + np.einsum("lim,mjk->lkij", Gamma, Gamma)
            - np.einsum("ljm,mik->lkij", Gamma, Gamma)
        )
        return R

    def riemann(self, point, X: AmbientVector, Y: AmbientVector,
                Z: AmbientVector, W: AmbientVector) -> float:
        """<R(X,Y)Z, W> at ``point``; all vectors must be based there."""
        p = np.asarray(point, dtype=float)
        base = _same_base(X, Y, Z, W)
        if not np.array_equal(base, p):
            raise ValueError("vectors not based at the evaluation point")
        R = self.riemann_components(p)
        G, _, _ = self.metric_jets(p)
        vec = np.einsum("lkij,i,j,k->l", R, X.components, Y.components, Z.components)
        return float(vec @ G @ W.components)

    def sectional_curvature(self, point, e1: AmbientVector, e2: AmbientVector) -> float:
        p = np.asarray(point, dtype=float)
        g11 = self.inner(e1, e1)
        g22 = self.inner(e2, e2)
        g12 = self.inner(e1, e2)
        gram = g11 * g22 - g12 * g12
        if gram <= 1e-12 * max(g11 * g22, 1e-300):
            raise GeometryError(f"degenerate plane section at {tuple(p)}")
        num = self.riemann(p, e1, e2, e2, e1)
        return num / gram

    # -- derivatives along maps -------------------------------------------------

    def covariant_derivative_along(self, map_fields, field_fields, direction, at):
        """Ambient covariant derivative of a field along a parametrized map.

        ``map_fields`` and ``field_fields`` are sequences of ``dim``
        ScalarFields over the same parameter space; ``direction`` lives in
        parameter space.  Returns (d_dir field^k + Gamma^k_ij (d_dir map^i)
        field^j) d_k at map(at).
        """
        at = np.asarray(at, dtype=float)
        direction = np.asarray(direction, dtype=float)
        x = np.zeros(self.dim)
        J = np.zeros((self.dim, at.shape[0]))
        V = np.zeros(self.dim)
        dV = np.zeros((self.dim, at.shape[0]))
        for k in range(self.dim):
            mj = jet_eval(map_fields[k], at)
            fj = jet_eval(field_fields[k], at)
            x[k] = mj.value
            J[k] = mj.grad
            V[k] = fj.value
            dV[k] = fj.grad
        Gamma = self.christoffel(x)
        dx = J @ direction
        comps = dV @ direction + np.einsum("kij,i,j->k", Gamma, dx, V)
        return AmbientVector(x, comps)


def christoffel_arrays(G, dG, d2G):
    """Christoffel symbols and their coordinate partials from metric jets."""
    Ginv = np.linalg.inv(G)
    # C[i,j,l] = d_i g_jl + d_j g_il - d_l g_ij
    C = dG.transpose(2, 0, 1) + dG.transpose(0, 2, 1) - dG
    Gamma = 0.5 * np.einsum("kl,ijl->kij", Ginv, C)
    dGinv = -np.einsum("ka,abm,bl->klm", Ginv, dG, Ginv)
    dC = d2G.transpose(2, 0, 1, 3) + d2G.transpose(0, 2, 1, 3) - d2G
    dGamma = 0.5 * (
        np.einsum("klm,ijl->kijm", dGinv, C)
        + np.einsum("kl,ijlm->kijm", Ginv, dC)
    )
    return Gamma, dGamma


# -- stock charts --------------------------------------------------------------


def euclidean_chart(dim=3, margin=1e-3) -> MetricChart:
    comps = [[ScalarField.constant(1.0 if i == j else 0.0, dim) for j in range(dim)]
             for i in range(dim)]
    return MetricChart(dim, comps, ChartDomain(margin=margin), name="euclidean")


def half_space_chart(dim=3, margin=1e-3) -> MetricChart:
    """Hyperbolic upper half-space: g = z^-2 * I on {z > 0} (z = last coord)."""
    last = dim - 1

    def entry(i, j):
        if i != j:
            return ScalarField.constant(0.0, dim)
        return ScalarField.from_callable(
            dim, lambda *c: 1.0 / (c[last] * c[last]), name="1/(z*z)"
        )

    comps = [[entry(i, j) for j in range(dim)] for i in range(dim)]
    dom = ChartDomain(bounds={last: (0.0, None)}, margin=margin)
    return MetricChart(dim, comps, dom, name="half-space")


def sphere_stereographic_chart(dim=3, radius=2.0, margin=1e-3) -> MetricChart:
    """Round sphere of the given radius in stereographic coordinates:
    g = (2 r^2 / (r^2 + |x|^2))^2 * I, constant curvature 1/r^2."""

    def entry(i, j):
        if i != j:
            return ScalarField.constant(0.0, dim)

        def conf(*c):
            s = None
            for ci in c:
                term = ci * ci
                s = term if s is None else s + term
            factor = (2.0 * radius * radius) / (s + radius * radius)
            return factor * factor

        return ScalarField.from_callable(dim, conf, name="stereographic")

    comps = [[entry(i, j) for j in range(dim)] for i in range(dim)]
    return MetricChart(dim, comps, ChartDomain(margin=margin), name="sphere-stereographic")
