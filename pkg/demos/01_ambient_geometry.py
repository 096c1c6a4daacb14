"""Ambient geometry on a chart: metric, Christoffel symbols, curvature.

Run:  python3 demos/01_ambient_geometry.py
"""

import numpy as np

from pasurf import (AmbientVector, euclidean_chart, half_space_chart,
                    sphere_stereographic_chart)

rng = np.random.default_rng(1)

print("=== hyperbolic upper half-space, metric z^-2 (dx^2 + dy^2 + dz^2) ===")
h3 = half_space_chart()
p = np.array([0.4, -1.0, 2.0])
mv = h3.metric_at(p)
print("metric diagonal at z = 2:", np.diag(mv.g))

gam = h3.christoffel(p)
print("Christoffel symbols (x,xz), (z,xx), (z,zz):",
      gam[0, 0, 2], gam[2, 0, 0], gam[2, 2, 2])

print("\nsectional curvature at 5 random points/planes (expect -1):")
for _ in range(5):
    q = np.array([rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.2, 8)])
    X = AmbientVector(q, rng.normal(size=3))
    Y = AmbientVector(q, rng.normal(size=3))
    print(f"  z = {q[2]:6.3f}:  K = {h3.sectional_curvature(q, X, Y):+.12f}")

print("\n=== round sphere of radius 2, stereographic coordinates ===")
s3 = sphere_stereographic_chart(3, radius=2.0)
q = np.array([0.3, -0.7, 0.2])
X = AmbientVector(q, [1.0, 0.2, 0.0])
Y = AmbientVector(q, [0.0, 1.0, -0.4])
print("sectional curvature (expect 1/r^2 = 0.25):",
      s3.sectional_curvature(q, X, Y))

print("\n=== flat space sanity ===")
e3 = euclidean_chart()
q = np.zeros(3)
X = AmbientVector(q, [1.0, 0.0, 0.0])
Y = AmbientVector(q, [0.0, 1.0, 0.0])
print("Euclidean sectional curvature:", e3.sectional_curvature(q, X, Y))
print("Euclidean curvature tensor <R(X,Y)Y,X>:", e3.riemann(q, X, Y, Y, X))
