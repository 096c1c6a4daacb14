"""Immersed surfaces: shape operator, curvatures, classification predicates.

Run:  python3 demos/02_surfaces_and_shape.py
"""

import numpy as np

from pasurf import (Immersion, brioschi_intrinsic, classify_umbilicity,
                    compile_field, euclidean_chart, half_space_chart, parse,
                    param_grid, ruled_check, surface_geometry,
                    three_curvatures)


def immersion(chart, sources, domain, constants=None):
    names = ["u", "v"] + list((constants or {}).keys())
    fields = [compile_field(parse(s, names), ["u", "v"], constants)
              for s in sources]
    return Immersion(chart, fields, domain)


e3, h3 = euclidean_chart(), half_space_chart()

print("=== radius-2 sphere, inward orientation ===")
sphere = immersion(e3, ["r*sin(u)*cos(v)", "r*sin(u)*sin(v)", "r*cos(u)"],
                   [(0.2, 2.9), (0.05, 6.2)], {"r": 2.0})
sg = surface_geometry(sphere, [1.0, 2.0], orientation=-1)
print("principal curvatures (expect 1/r = 0.5):",
      [round(p.kappa, 12) for p in sg.principal])
print("three curvatures (K_int, K_ext, K_sec):",
      three_curvatures(sphere, [1.0, 2.0]))
print("independent intrinsic route (Brioschi):",
      brioschi_intrinsic(sphere, [1.0, 2.0]))

grid, _ = param_grid(sphere.domain, (8, 8))
print("umbilicity:", classify_umbilicity(sphere, grid, orientation=-1))

print("\n=== hemisphere inside the hyperbolic half-space ===")
hemi = immersion(h3, ["cos(asin(sech(u)))*cos(v)",
                      "cos(asin(sech(u)))*sin(v)", "sech(u)"],
                 [(0.2, 3.0), (0.05, 6.2)])
grid, _ = param_grid(hemi.domain, (8, 8))
rep = classify_umbilicity(hemi, grid)
print(f"classification: {rep.kind} (max |kappa| = {rep.max_shape_norm:.2e})")
print("three curvatures (expect -1, 0, -1):", three_curvatures(hemi, [0.9, 1.3]))

print("\n=== ruled surfaces: geodesic residual of the u-lines ===")
cone = immersion(e3, ["u*cos(v)/sqrt(2)", "u*sin(v)/sqrt(2)", "u/sqrt(2)"],
                 [(0.3, 3.0), (0.05, 6.2)])
grid, _ = param_grid(cone.domain, (6, 6))
print("cone rulings:", ruled_check(cone, 0, grid))
grid, _ = param_grid(sphere.domain, (6, 6))
print("sphere meridians (not geodesic lines of R^3):",
      ruled_check(sphere, 0, grid, tol=1e-6).max_residual)
