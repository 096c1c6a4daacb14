"""Ambient geometry: metric, Christoffels, curvature, derivatives along maps."""

import math
import random

import numpy as np
import pytest

from pasurf.charts import (AmbientVector, ChartDomain, DomainError,
                           GeometryError, MetricChart, euclidean_chart,
                           half_space_chart, sphere_stereographic_chart)
from pasurf.exprs import compile_field, parse
from pasurf.jets import ScalarField

RNG = np.random.default_rng(20250810)


def random_spd_chart(seed):
    """g = I + 0.3 S with S symmetric, |S_ij| <= 0.5: SPD everywhere."""
    rng = random.Random(seed)
    sources = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    offs = ["0.15*sin(x + y)", "0.15*cos(y*z)", "0.15*sin(x - z)"]
    perturb = ["0.3*sech(x)", "0.3*sech(y)", "0.3*sech(z)"]
    names = ["x", "y", "z"]
    comps = [[None] * 3 for _ in range(3)]
    k = 0
    for i in range(3):
        for j in range(i, 3):
            if i == j:
                src = f"1 + {perturb[i]}"
            else:
                src = offs[k % 3]
                k += 1
            fld = compile_field(parse(src, names), names)
            comps[i][j] = fld
            comps[j][i] = fld
    return MetricChart(3, comps, ChartDomain(), name=f"random-spd-{seed}")


def test_euclidean_metric_identity():
    e3 = euclidean_chart()
    mv = e3.metric_at([0.3, -1.0, 2.0])
    assert np.allclose(mv.g, np.eye(3), atol=0)
    assert np.allclose(mv.inverse, np.eye(3), atol=0)


def test_half_space_metric_values():
    h3 = half_space_chart()
    mv = h3.metric_at([5.0, -3.0, 2.0])
    assert np.allclose(mv.g, 0.25 * np.eye(3), atol=1e-15)
    assert np.allclose(mv.inverse, 4.0 * np.eye(3), atol=1e-12)


def test_metric_inverse_residual_random_spd():
    for seed in range(5):
        chart = random_spd_chart(seed)
        for _ in range(5):
            p = RNG.uniform(-2, 2, size=3)
            mv = chart.metric_at(p)
            assert np.abs(mv.g @ mv.inverse - np.eye(3)).max() <= 1e-12


def test_non_spd_metric_is_hard_error():
    comps = [[ScalarField.constant(c, 3) for c in row]
             for row in [[-1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]]]
    chart = MetricChart(3, comps)
    with pytest.raises(GeometryError):
        chart.metric_at([0.0, 0.0, 0.0])


def test_domain_margin():
    h3 = half_space_chart(margin=1e-3)
    with pytest.raises(DomainError):
        h3.metric_at([0.0, 0.0, 5e-4])


def test_euclidean_christoffels_vanish():
    e3 = euclidean_chart()
    assert np.abs(e3.christoffel([1.0, 2.0, 3.0])).max() == 0.0


def test_half_space_christoffels_hand_values():
    # conformal metric z^-2 I: Gamma^x_xz = -1/z, Gamma^z_xx = 1/z,
    # Gamma^z_zz = -1/z; at z = 2 these are -0.5, 0.5, -0.5
    h3 = half_space_chart()
    G = h3.christoffel([0.7, -0.1, 2.0])
    assert G[0, 0, 2] == pytest.approx(-0.5, abs=1e-12)
    assert G[2, 0, 0] == pytest.approx(0.5, abs=1e-12)
    assert G[2, 2, 2] == pytest.approx(-0.5, abs=1e-12)
    assert np.abs(G - G.transpose(0, 2, 1)).max() <= 1e-15


def test_metric_compatibility_random():
    for seed in range(4):
        chart = random_spd_chart(seed + 10)
        p = RNG.uniform(-2, 2, size=3)
        G, dG, _ = chart.metric_jets(p)
        Gam = chart.christoffel(p)
        res = (dG.transpose(2, 0, 1)
               - np.einsum("lki,lj->kij", Gam, G)
               - np.einsum("lkj,il->kij", Gam, G))
        assert np.abs(res).max() <= 1e-9


def test_riemann_flat():
    e3 = euclidean_chart()
    p = np.array([1.0, 2.0, 3.0])
    vs = [AmbientVector(p, RNG.normal(size=3)) for _ in range(4)]
    assert e3.riemann(p, *vs) == pytest.approx(0.0, abs=1e-15)


def test_half_space_constant_curvature_tensor():
    # <R(X,Y)Y,X> = -(|X|^2 |Y|^2 - <X,Y>^2) for curvature -1
    h3 = half_space_chart()
    for _ in range(10):
        p = np.array([RNG.uniform(-3, 3), RNG.uniform(-3, 3),
                      RNG.uniform(0.1, 10.0)])
        X = AmbientVector(p, RNG.normal(size=3))
        Y = AmbientVector(p, RNG.normal(size=3))
        lhs = h3.riemann(p, X, Y, Y, X)
        gram = h3.inner(X, X) * h3.inner(Y, Y) - h3.inner(X, Y) ** 2
        assert lhs == pytest.approx(-gram, rel=1e-10, abs=1e-12)


def test_riemann_antisymmetries_and_bianchi():
    for seed in range(3):
        chart = random_spd_chart(seed + 20)
        p = RNG.uniform(-1.5, 1.5, size=3)
        X, Y, Z, W = (AmbientVector(p, RNG.normal(size=3)) for _ in range(4))
        r = chart.riemann
        assert abs(r(p, X, Y, Z, W) + r(p, Y, X, Z, W)) <= 1e-9
        assert abs(r(p, X, Y, Z, W) + r(p, X, Y, W, Z)) <= 1e-9
        bianchi = (r(p, X, Y, Z, W) + r(p, Y, Z, X, W) + r(p, Z, X, Y, W))
        assert abs(bianchi) <= 1e-8


def test_riemann_vs_fd_christoffel_route():
    """Independent curvature route: difference the Christoffel symbols."""
    chart = random_spd_chart(31)
    p = np.array([0.3, -0.4, 0.8])
    h = 1e-5
    dGamma_fd = np.zeros((3, 3, 3, 3))
    for m in range(3):
        dp = np.zeros(3)
        dp[m] = h
        dGamma_fd[..., m] = (chart.christoffel(p + dp)
                             - chart.christoffel(p - dp)) / (2 * h)
    Gam = chart.christoffel(p)
    R_fd = (dGamma_fd.transpose(0, 2, 3, 1)
            - dGamma_fd.transpose(0, 2, 1, 3)
            + np.einsum("lim,mjk->lkij", Gam, Gam)
            - np.einsum("ljm,mik->lkij", Gam, Gam))
    R = chart.riemann_components(p)
    assert np.abs(R - R_fd).max() <= 1e-5


def test_sectional_curvature_flat_and_spaceforms():
    e3 = euclidean_chart()
    p = np.zeros(3)
    assert e3.sectional_curvature(
        p, AmbientVector(p, [1, 0, 0]), AmbientVector(p, [0, 1, 1])
    ) == pytest.approx(0.0, abs=1e-15)

    h3 = half_space_chart()
    vals = []
    for _ in range(100):
        q = np.array([RNG.uniform(-3, 3), RNG.uniform(-3, 3),
                      RNG.uniform(0.1, 10.0)])
        X = AmbientVector(q, RNG.normal(size=3))
        Y = AmbientVector(q, RNG.normal(size=3))
        vals.append(h3.sectional_curvature(q, X, Y))
    assert max(abs(v + 1.0) for v in vals) <= 1e-7

    s3 = sphere_stereographic_chart(3, radius=2.0)
    q = np.array([0.3, -0.7, 0.2])
    X = AmbientVector(q, [1.0, 0.2, 0.0])
    Y = AmbientVector(q, [0.0, 1.0, -0.4])
    assert s3.sectional_curvature(q, X, Y) == pytest.approx(0.25, abs=1e-10)


def test_sectional_basis_independent():
    h3 = half_space_chart()
    p = np.array([0.5, 1.0, 2.0])
    X = AmbientVector(p, [1.0, 0.3, -0.2])
    Y = AmbientVector(p, [0.1, -1.0, 0.8])
    k0 = h3.sectional_curvature(p, X, Y)
    rng = np.random.default_rng(3)
    for _ in range(5):
        M = rng.normal(size=(2, 2))
        while abs(np.linalg.det(M)) < 0.1:
            M = rng.normal(size=(2, 2))
        X2 = AmbientVector(p, M[0, 0] * X.components + M[0, 1] * Y.components)
        Y2 = AmbientVector(p, M[1, 0] * X.components + M[1, 1] * Y.components)
        assert h3.sectional_curvature(p, X2, Y2) == pytest.approx(k0, abs=1e-10)


def test_degenerate_section_rejected():
    e3 = euclidean_chart()
    p = np.zeros(3)
    X = AmbientVector(p, [1.0, 2.0, 0.0])
    with pytest.raises(GeometryError):
        e3.sectional_curvature(p, X, AmbientVector(p, [2.0, 4.0, 0.0]))


def test_mismatched_base_points_rejected():
    e3 = euclidean_chart()
    p, q = np.zeros(3), np.ones(3)
    X = AmbientVector(p, [1, 0, 0])
    Y = AmbientVector(q, [0, 1, 0])
    with pytest.raises(ValueError):
        e3.riemann(p, X, Y, Y, X)


def _const_fields(values, arity=2):
    return [ScalarField.constant(v, arity) for v in values]


def test_covariant_derivative_constant_field_flat():
    e3 = euclidean_chart()
    names = ["u", "v"]
    mapf = [compile_field(parse(s, names), names) for s in ["u", "v", "1"]]
    fieldf = _const_fields([0.0, 0.0, 1.0])
    out = e3.covariant_derivative_along(mapf, fieldf, [1.0, 0.0], [0.3, 0.4])
    assert np.abs(out.components).max() == 0.0


def test_covariant_derivative_half_space_hand_value():
    # nabla_{d_x}(-z d_z) = d_x in the half-space model
    h3 = half_space_chart()
    names = ["u", "v"]
    mapf = [compile_field(parse(s, names), names) for s in ["u", "v", "2"]]
    fieldf = [compile_field(parse(s, names), names) for s in ["0", "0", "-2"]]
    out = h3.covariant_derivative_along(mapf, fieldf, [1.0, 0.0], [0.5, -0.3])
    assert np.allclose(out.components, [1.0, 0.0, 0.0], atol=1e-14)


def test_covariant_derivative_linear_in_direction():
    h3 = half_space_chart()
    names = ["u", "v"]
    mapf = [compile_field(parse(s, names), names)
            for s in ["cos(v)", "sin(v)", "exp(u)"]]
    fieldf = [compile_field(parse(s, names), names)
              for s in ["u*v", "sin(u)", "exp(0.3*u)"]]
    at = [0.2, 1.1]
    d1, d2 = np.array([0.7, -0.4]), np.array([-0.2, 1.3])
    a, b = 2.0, -0.5
    lhs = h3.covariant_derivative_along(mapf, fieldf, a * d1 + b * d2, at)
    r1 = h3.covariant_derivative_along(mapf, fieldf, d1, at)
    r2 = h3.covariant_derivative_along(mapf, fieldf, d2, at)
    assert np.abs(lhs.components - a * r1.components - b * r2.components).max() <= 1e-10
