"""Prescribed-angle analysis of a unit field along a hypersurface.

Per point: the angle function theta with <V, N> = cos(theta), the
tangential component T = V - cos(theta) N, the adapted frame e1 = T/|T|,
e2, and the residuals of the structural identities tying the frame, the
shape operator and the fitted potential together.  The identities hold
with exact first derivatives because theta, T and the frame are carried
as first-order jets; only quantities involving derivatives of the shape
operator (the B-route intrinsic curvature, theta'') use central finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .charts import AmbientVector
from .fields import FieldAlongSurface, torse_fit
from .jets import Jet1, d1_solve, d1_sqrt
from .surfaces import Immersion, PointGeometry

FRAME_T_TOL = 1e-7      # |T| below this: e1 undefined, frame ops skipped
SIN_GUARD = 1e-7        # sin(theta) below this: B undefined
COS_CLAMP = 1e-12       # |cos| within this of 1: acos derivative via |T|
THETA_CONST_SPREAD = 1e-5


@dataclass(frozen=True)
class PADecomposition:
    """V = T + cos(theta) N with T = sin(theta) e1 (where defined)."""

    theta: float
    cos_theta: float
    sin_theta: float
    T: np.ndarray                 # ambient components
    T_params: np.ndarray
    e1_params: Optional[np.ndarray]
    e2_params: Optional[np.ndarray]
    flipped: bool                 # normal flipped by the 'paper' policy
    frame_ok: bool
    recon_residual: float         # | V - T - cos(theta) N |
    sin_match: float              # | |T| - sin(theta) |


class PAPoint:
    """Full pointwise record; inputs are immutable, computation is eager."""

    def __init__(self, fld: FieldAlongSurface, params, policy="paper",
                 orientation=+1, tol=1e-6, light=False, with_fit=True):
        self.field = fld
        self.params = np.asarray(params, dtype=float)
        self.policy = policy
        self.tol = tol
        pg = PointGeometry(fld.immersion, self.params, orientation)
        self.pg = pg
        n, d = pg.n, pg.d

        jets = fld.jets_at(self.params)
        V1 = [Jet1(j.value, tuple(map(float, j.grad))) for j in jets]
        self.V = np.array([j.value for j in jets])
        N1 = pg.normal1
        c_raw = pg.inner1(V1, N1)
        if policy == "paper":
            sign = -1.0 if c_raw.v < 0.0 else 1.0
        elif policy == "fixed":
            sign = 1.0
        else:
            raise ValueError(f"unknown orientation policy {policy!r}")
        self.normal_sign = sign
        self.flipped = sign < 0.0
        N1s = [comp * sign for comp in N1]
        c1 = c_raw * sign
        self.N = np.array([comp.v for comp in N1s])

        cv = min(1.0, max(-1.0, c1.v))
        self.cos_theta = cv
        self.cos_grad = np.array(c1.d)
        T1 = [V1[k] - c1 * N1s[k] for k in range(d)]
        self.T1 = T1
        self.T = np.array([comp.v for comp in T1])
        nt2 = pg.inner1(T1, T1)
        tnorm = math.sqrt(max(nt2.v, 0.0))
        if abs(c1.v) <= 1.0 - COS_CLAMP:
            self.theta = math.acos(cv)
        else:
            # acos amplifies round-off near +-1 (theta ~ sqrt(2 eps));
            # |T| = sin(theta) is exact there
            half = math.asin(min(tnorm, 1.0))
            self.theta = half if c1.v > 0.0 else math.pi - half
        self.sin_theta = math.sin(self.theta)
        self.sin_match = abs(tnorm - self.sin_theta)

        # theta with exact parameter gradient; near cos = +-1 switch to the
        # sine route through |T| (the acos chain degenerates there)
        self.theta_grad = None
        if abs(c1.v) <= 1.0 - COS_CLAMP:
            self.theta_grad = -np.array(c1.d) / math.sqrt(1.0 - c1.v * c1.v)
        elif nt2.v > FRAME_T_TOL**2:
            st = d1_sqrt(nt2)
            base = np.array(st.d) / math.sqrt(max(1.0 - st.v * st.v, 1e-300))
            self.theta_grad = base if c1.v > 0.0 else -base

        self.T_params = pg.tangential_coeffs(self.T)
        self.frame_ok = tnorm > FRAME_T_TOL
        self.e1_params = self.e2_params = None
        self.e1_amb = self.e2_amb = None
        e11 = e21 = None
        if self.frame_ok:
            st = d1_sqrt(nt2)
            e11 = [comp / st for comp in T1]
            # complete the frame from the sturdier coordinate direction
            cands = []
            for a in range(n):
                proj = pg.inner1(pg.t1[a], e11)
                w = [pg.t1[a][k] - proj * e11[k] for k in range(d)]
                w2 = pg.inner1(w, w)
                cands.append((w2.v, a, w, w2))
            _, _, w, w2 = max(cands, key=lambda item: item[0])
            e21 = [comp / d1_sqrt(w2) for comp in w]
            ip1 = [pg.inner1(e11, pg.t1[a]) for a in range(n)]
            ip2 = [pg.inner1(e21, pg.t1[a]) for a in range(n)]
            ff_rows = [[pg.ff1[a][b] for b in range(n)] for a in range(n)]
            e1p = d1_solve([row[:] for row in ff_rows], ip1)
            e2p = d1_solve([row[:] for row in ff_rows], ip2)
            det = e1p[0] * e2p[1] - e1p[1] * e2p[0] if n == 2 else None
            if det is not None and det.v < 0.0:
                e21 = [-comp for comp in e21]
                e2p = [-comp for comp in e2p]
            self.e1_jet = e11
            self.e2_jet = e21
            self.e1_params = np.array([c.v for c in e1p])
            self.e2_params = np.array([c.v for c in e2p])
            self.e1_amb = np.array([c.v for c in e11])
            self.e2_amb = np.array([c.v for c in e21])

        recon = self.V - self.T - cv * self.N
        self.recon_residual = pg.ambient_norm(recon)

        if not with_fit:
            self.fit = None
            self.f = None
            self.kappa1 = self.kappa2 = self.off_diag = None
            self.e1_theta = self.e2_theta = None
            self.B = None
            return

        # torse fit on the adapted frame when available
        if self.frame_ok and n == 2:
            basis = [self.e1_params, self.e2_params]
        else:
            frame = pg._coordinate_frame()
            basis = [frame[:, a] for a in range(n)]
        self.fit = torse_fit(pg, fld, basis=basis, tol=tol)
        self.f = self.fit.f

        # signed shape data (sign follows the possibly flipped normal)
        self.h_signed = sign * pg.second_ff
        self.shape_signed = sign * pg.shape_coord
        self.kappa1 = self.kappa2 = self.off_diag = None
        self.e1_theta = self.e2_theta = None
        self.B = None
        if self.frame_ok and n == 2:
            e1p, e2p = self.e1_params, self.e2_params
            self.kappa1 = float(e1p @ self.h_signed @ e1p)
            self.kappa2 = float(e2p @ self.h_signed @ e2p)
            self.off_diag = float(e1p @ self.h_signed @ e2p)
            if self.theta_grad is not None:
                self.e1_theta = float(self.theta_grad @ e1p)
                self.e2_theta = float(self.theta_grad @ e2p)
            if self.sin_theta > SIN_GUARD:
                self.B = (self.f + self.kappa2 * cv) / self.sin_theta

        if light:
            self.residual_e12 = (math.nan, math.nan)
            self.residual_levi = (math.nan,) * 4
            self.residual_dercomp = (math.nan, math.nan)
            self.K_int = self.K_ext = self.K_sec = None
            self.K_ext_formula = None
            return

        # frame identity residuals (Prop.-style equations)
        self.residual_e12 = (math.nan, math.nan)
        self.residual_levi = (math.nan,) * 4
        if (self.frame_ok and n == 2 and self.theta_grad is not None
                and self.B is not None):
            self.residual_e12 = (
                abs(self.e1_theta - self.kappa1 - self.f * cv),
                abs(self.e2_theta),
            )
            nab1 = pg.cov_deriv_derived(self.e1_jet)
            nab2 = pg.cov_deriv_derived(self.e2_jet)
            d11 = pg.tangential_part(nab1 @ self.e1_params)
            d12 = pg.tangential_part(nab2 @ self.e1_params)
            d21 = pg.tangential_part(nab1 @ self.e2_params)
            d22 = pg.tangential_part(nab2 @ self.e2_params)
            self.residual_levi = (
                pg.ambient_norm(d11),
                pg.ambient_norm(d12),
                pg.ambient_norm(d21 - self.B * self.e2_amb),
                pg.ambient_norm(d22 + self.B * self.e1_amb),
            )

        # comparison-system residuals, maximized over the frame directions
        if self.frame_ok and n == 2:
            directions = [self.e1_params, self.e2_params]
        else:
            frame = pg._coordinate_frame()
            directions = [frame[:, a] for a in range(n)]
        nabT = pg.cov_deriv_derived(self.T1)
        r1 = r2 = 0.0
        for Xp in directions:
            Xa = pg.J @ Xp
            xt = float(Xa @ pg.Gc @ self.T)
            lhs = self.f * (Xa - xt * self.T)
            ax_p = self.shape_signed @ Xp
            ax = pg.J @ ax_p
            rhs = pg.tangential_part(nabT @ Xp) - cv * ax
            r1 = max(r1, pg.ambient_norm(lhs - rhs))
            a_t_x = float(Xp @ self.h_signed @ self.T_params)
            x_cos = float(self.cos_grad @ Xp)
            r2 = max(r2, abs(a_t_x + x_cos + self.f * cv * xt))
        self.residual_dercomp = (r1, r2)

        # curvatures (2-surfaces)
        self.K_int = self.K_ext = self.K_sec = None
        self.K_ext_formula = None
        if n == 2:
            self.K_ext = float(np.linalg.det(self.shape_signed))
            tu = AmbientVector(pg.x, pg.J[:, 0])
            tv = AmbientVector(pg.x, pg.J[:, 1])
            self.K_sec = fld.immersion.chart.sectional_curvature(pg.x, tu, tv)
            self.K_int = self.K_sec + self.K_ext
            if self.e1_theta is not None and self.kappa2 is not None:
                self.K_ext_formula = (self.e1_theta - self.f * cv) * self.kappa2

    def decomposition(self) -> PADecomposition:
        return PADecomposition(
            self.theta, self.cos_theta, self.sin_theta, self.T, self.T_params,
            self.e1_params, self.e2_params, self.flipped, self.frame_ok,
            self.recon_residual, self.sin_match,
        )


def angle_function(fld, immersion, at, policy="paper", orientation=+1):
    """Angle decomposition at one point (the immersion must be the field's)."""
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    return PAPoint(fld, at, policy, orientation, light=True).decomposition()


def dercomp_residuals(fld, immersion, at, policy="paper", orientation=+1):
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    return PAPoint(fld, at, policy, orientation).residual_dercomp


def plevi_frame_check(fld, immersion, at, policy="paper", orientation=+1):
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    pt = PAPoint(fld, at, policy, orientation)
    return pt.residual_e12, pt.residual_levi


# -- grid sweep ----------------------------------------------------------------


@dataclass
class GridAnalysis:
    points: list
    theta_min: float
    theta_max: float
    flip_count: int
    frame_skipped: int
    max_torse_residual: float
    max_anti_defect: float
    max_recon: float
    max_sin_match: float

    @property
    def theta_spread(self):
        return self.theta_max - self.theta_min

    def theta_constant(self, spread=THETA_CONST_SPREAD):
        return self.theta_spread <= spread

    def max_over(self, getter, default=0.0):
        vals = [getter(p) for p in self.points]
        vals = [v for v in vals if v is not None and not math.isnan(v)]
        return max(vals) if vals else default


def analyze_grid(fld: FieldAlongSurface, grid, policy="paper", orientation=+1,
                 tol=1e-6, light=False) -> GridAnalysis:
    pts = [PAPoint(fld, p, policy, orientation, tol, light=light) for p in grid]
    thetas = [p.theta for p in pts]
    return GridAnalysis(
        points=pts,
        theta_min=min(thetas),
        theta_max=max(thetas),
        flip_count=sum(1 for p in pts if p.flipped),
        frame_skipped=sum(1 for p in pts if not p.frame_ok),
        max_torse_residual=max(p.fit.residual for p in pts),
        max_anti_defect=max(p.fit.anti_defect for p in pts),
        max_recon=max(p.recon_residual for p in pts),
        max_sin_match=max(p.sin_match for p in pts),
    )


# -- curvature formulas ----------------------------------------------------------


@dataclass(frozen=True)
class PACurvatures:
    K_int_B: float
    K_int_gauss: float
    K_ext_formula: float
    K_ext_det: float
    B: float
    e1_B: float

    @property
    def int_mismatch(self):
        return abs(self.K_int_B - self.K_int_gauss)

    @property
    def ext_mismatch(self):
        return abs(self.K_ext_formula - self.K_ext_det)


def _b_value(fld, params, policy, orientation):
    pt = PAPoint(fld, params, policy, orientation, light=True)
    if pt.B is None:
        raise ValueError(f"B undefined at {tuple(params)} (sin theta guard)")
    return pt.B


def pa_curvatures(fld, immersion, at, policy="paper", orientation=+1,
                  fd_step=1e-3) -> PACurvatures:
    """Intrinsic curvature from the connection coefficient B and extrinsic
    curvature from the frame formula, with their structural cross-checks.

    e1(B) involves shape-operator derivatives (third order in the map), so
    it is taken by Richardson-extrapolated central differences of the
    exact pointwise B.
    """
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    pt = PAPoint(fld, at, policy, orientation)
    if pt.B is None or not pt.frame_ok:
        raise ValueError(f"B-formula inapplicable at {tuple(at)}: frame undefined")
    at = np.asarray(at, dtype=float)

    def central(h):
        out = np.zeros(pt.pg.n)
        for a in range(pt.pg.n):
            step = np.zeros(pt.pg.n)
            step[a] = h
            out[a] = (
                _b_value(fld, at + step, policy, orientation)
                - _b_value(fld, at - step, policy, orientation)
            ) / (2.0 * h)
        return out

    dB = (4.0 * central(fd_step / 2.0) - central(fd_step)) / 3.0
    e1_B = float(dB @ pt.e1_params)
    k_int_b = -(e1_B + pt.B * pt.B)
    return PACurvatures(k_int_b, pt.K_int, pt.K_ext_formula, pt.K_ext,
                        pt.B, e1_B)


# -- theorem-level reports ---------------------------------------------------------


@dataclass(frozen=True)
class PrincipalDirectionReport:
    applicable: bool
    reason: str
    max_identity_defect: float = math.nan   # |<A(T), e2> - sin(theta) e2(theta)|
    T_principal: bool = False
    max_off_diag: float = math.nan
    theta_constant: bool = False
    theta_spread: float = math.nan
    max_kappa1_defect: float = math.nan     # |kappa1 + f cos(theta)|, when applicable


def principal_direction_test(fld, immersion, grid, policy="paper",
                             orientation=+1, tol=1e-6):
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    ga = analyze_grid(fld, grid, policy, orientation, tol, light=True)
    if ga.frame_skipped:
        return PrincipalDirectionReport(
            False, f"theta vanishes at {ga.frame_skipped} grid points"
        )
    ident = 0.0
    off = 0.0
    for p in ga.points:
        a_t_e2 = float(p.e2_params @ p.h_signed @ p.T_params)
        e2th = p.e2_theta if p.e2_theta is not None else math.nan
        ident = max(ident, abs(a_t_e2 - p.sin_theta * e2th))
        off = max(off, abs(p.off_diag))
    t_principal = off <= tol
    theta_const = ga.theta_constant()
    kdef = math.nan
    if t_principal and theta_const:
        kdef = max(abs(p.kappa1 + p.f * p.cos_theta) for p in ga.points)
    return PrincipalDirectionReport(True, "ok", ident, t_principal, off,
                                    theta_const, ga.theta_spread, kdef)


@dataclass(frozen=True)
class TheoremReport:
    applicable: bool
    reason: str
    max_A_T: float = math.nan
    max_geodesic: float = math.nan       # |nabla_T T| ambient
    max_det_A: float = math.nan
    max_umbilic_dev: float = math.nan


def _tangential_flow_checks(points):
    """max |A(T)|, |nabla_T T| and |det A| over analyzed points."""
    a_t = geo = det = 0.0
    for p in points:
        pg = p.pg
        atp = p.shape_signed @ p.T_params
        a_t = max(a_t, pg.ambient_norm(pg.J @ atp))
        nabT = pg.cov_deriv_derived(p.T1)
        geo = max(geo, pg.ambient_norm(nabT @ p.T_params))
        det = max(det, abs(float(np.linalg.det(p.shape_signed))))
    return a_t, geo, det


def parallel_V_theorem_check(fld, immersion, grid, policy="paper",
                             orientation=+1, tol=1e-6):
    """Parallel V, non-totally-geodesic surface, constant theta: the
    T-integral curves are ambient geodesics and det A = 0."""
    from .surfaces import classify_umbilicity

    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    ga = analyze_grid(fld, grid, policy, orientation, tol, light=True)
    bad = [p for p in ga.points if p.fit.klass != "parallel"]
    if bad:
        return TheoremReport(False, f"field class {bad[0].fit.klass!r} is not parallel")
    umb = classify_umbilicity(immersion, grid, tol, orientation)
    if umb.kind == "totally_geodesic":
        return TheoremReport(False, "surface is totally geodesic (vacuous case)")
    if not ga.theta_constant():
        return TheoremReport(False, f"theta not constant (spread {ga.theta_spread:.3e})")
    a_t, geo, det = _tangential_flow_checks(ga.points)
    return TheoremReport(True, "ok", a_t, geo, det)


def theta_extremes_check(fld, immersion, grid, policy="paper", orientation=+1,
                         tol=1e-6, theta_tol=1e-6):
    """theta = pi/2: ruled-type conclusions; theta = 0: total umbilicity."""
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    ga = analyze_grid(fld, grid, policy, orientation, tol, light=True)
    half_pi = math.pi / 2.0
    if all(abs(p.theta - half_pi) <= theta_tol for p in ga.points):
        a_t, geo, det = _tangential_flow_checks(ga.points)
        return "right-angle", TheoremReport(True, "theta = pi/2", a_t, geo, det)
    if all(abs(p.theta) <= theta_tol for p in ga.points):
        dev = 0.0
        for p in ga.points:
            kappas = np.array([pp.kappa for pp in p.pg.principal])
            dev = max(dev, float(np.abs(kappas - kappas.mean()).max()))
        return "normal", TheoremReport(True, "theta = 0",
                                       max_umbilic_dev=dev)
    return "mixed", TheoremReport(
        False, f"theta neither 0 nor pi/2 on the grid "
               f"(range [{ga.theta_min:.3e}, {ga.theta_max:.3e}])"
    )


@dataclass(frozen=True)
class UmbilicParallelReport:
    applicable: bool
    reason: str
    max_kappa_defect: float = math.nan       # |kappa - e1(theta)|
    max_B_defect: float = math.nan           # |B - e1(theta) cot(theta)|
    max_kint_defect: float = math.nan
    max_kext_defect: float = math.nan
    max_ksec_defect: float = math.nan
    kext_constant: bool = False
    max_ksec_abs: float = math.nan
    max_int_ext_gap: float = math.nan


def umbilic_parallel_relations(fld, immersion, grid, policy="paper",
                               orientation=+1, tol=1e-6, fd_step=1e-4):
    """Parallel V along a totally umbilical surface with kappa != 0:
    kappa = theta', B = theta' cot(theta), and the curvature triple
    (theta'' cot(theta) + theta'^2, theta'^2, theta'' cot(theta))."""
    from .surfaces import classify_umbilicity

    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    ga = analyze_grid(fld, grid, policy, orientation, tol)
    bad = [p for p in ga.points if p.fit.klass != "parallel"]
    if bad:
        return UmbilicParallelReport(False,
                                     f"field class {bad[0].fit.klass!r} is not parallel")
    umb = classify_umbilicity(immersion, grid, tol, orientation)
    if umb.kind != "totally_umbilical":
        return UmbilicParallelReport(False, f"surface is {umb.kind}")
    if min(abs(umb.delta_min), abs(umb.delta_max)) <= tol:
        return UmbilicParallelReport(False, "umbilical factor vanishes (degenerate)")
    if ga.frame_skipped:
        return UmbilicParallelReport(False, "frame undefined somewhere on the grid")

    kd = bd = kint_d = kext_d = ksec_d = 0.0
    kexts = []
    for p in ga.points:
        kappa = float(p.e1_params @ p.h_signed @ p.e1_params)
        tp = p.e1_theta
        kd = max(kd, abs(kappa - tp))
        cot = p.cos_theta / p.sin_theta
        bd = max(bd, abs(p.B - tp * cot))
        # theta'' by flow differences of the exact e1(theta)
        at = p.params
        h = fd_step
        e1p = p.e1_params

        def e1_theta_at(q):
            pt = PAPoint(fld, q, policy, orientation, light=True)
            return float(pt.theta_grad @ pt.e1_params)

        tpp = (e1_theta_at(at + h * e1p) - e1_theta_at(at - h * e1p)) / (2.0 * h)
        kint_d = max(kint_d, abs(p.K_int - (tpp * cot + tp * tp)))
        kext_d = max(kext_d, abs(p.K_ext - tp * tp))
        ksec_d = max(ksec_d, abs(p.K_sec - tpp * cot))
        kexts.append(p.K_ext)
    kext_const = (max(kexts) - min(kexts)) <= THETA_CONST_SPREAD
    ksec_abs = ga.max_over(lambda p: abs(p.K_sec), math.nan)
    gap = ga.max_over(lambda p: abs(p.K_int - p.K_ext), math.nan)
    return UmbilicParallelReport(True, "ok", kd, bd, kint_d, kext_d, ksec_d,
                                 kext_const, ksec_abs, gap)


# -- adapted coordinates -----------------------------------------------------------


@dataclass
class AdaptedChart:
    """Semi-geodesic coordinates built from the e1/e2 frame.

    ``params_grid[i, j]`` is the scene parameter point at (u_values[i],
    v_values[j]); the induced metric there should be du^2 + warp^2 dv^2.
    """

    seed: np.ndarray
    u_values: np.ndarray
    v_values: np.ndarray
    params_grid: np.ndarray        # (nu, nv, n)
    warp: np.ndarray               # (nu, nv)
    B_grid: np.ndarray             # (nu, nv)
    metric_residual: float         # max(|g_uu - 1|, |g_uv|) on interior nodes
    warp_model_residual: float     # max |warp/warp0 - exp(int B du)| relative
    coverage: float


def _frame_direction(fld, params, which, policy, orientation):
    pt = PAPoint(fld, params, policy, orientation, light=True, with_fit=False)
    if not pt.frame_ok:
        raise ValueError(f"frame degenerate at {tuple(params)}")
    return pt.e1_params if which == 0 else pt.e2_params


def _rk4_segment(fld, p, which, h, steps, policy, orientation):
    for _ in range(steps):
        k1 = _frame_direction(fld, p, which, policy, orientation)
        k2 = _frame_direction(fld, p + 0.5 * h * k1, which, policy, orientation)
        k3 = _frame_direction(fld, p + 0.5 * h * k2, which, policy, orientation)
        k4 = _frame_direction(fld, p + h * k3, which, policy, orientation)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return p


def _march(fld, start, which, values, i0, substeps, policy, orientation):
    """Incremental RK4 flow to each signed arclength in ``values``; returns
    a dict index -> point for the reachable ones (values[i0] must be 0)."""
    out = {i0: np.asarray(start, dtype=float).copy()}
    for direction in (1, -1):
        p = out[i0]
        prev = values[i0]
        rng = range(i0 + 1, len(values)) if direction > 0 else range(i0 - 1, -1, -1)
        for i in rng:
            try:
                p = _rk4_segment(fld, p, which, (values[i] - prev) / substeps,
                                 substeps, policy, orientation)
            except (ValueError, ArithmeticError):
                break
            out[i] = p
            prev = values[i]
    return out


def adapted_chart(fld, immersion, seed, u_extent=0.6, v_extent=0.3,
                  nu=13, nv=7, substeps=4, policy="paper", orientation=+1):
    """Construct (u, v) with e1 = d_u by integrating e1 flow lines from an
    e2 spine through ``seed``; verify the semi-geodesic metric form and
    sample the warp for comparison with exp(int B du)."""
    if immersion is not fld.immersion:
        raise ValueError("field is not defined along this immersion")
    if nu % 2 == 0 or nv % 2 == 0:
        raise ValueError("nu and nv must be odd so the seed is a grid node")
    seed = np.asarray(seed, dtype=float)
    u_values = np.linspace(-u_extent, u_extent, nu)
    v_values = np.linspace(-v_extent, v_extent, nv)
    n = immersion.n_params
    grid = np.full((nu, nv, n), np.nan)
    ok = np.zeros((nu, nv), dtype=bool)

    spine = _march(fld, seed, 1, v_values, nv // 2, substeps, policy, orientation)
    for j, start in spine.items():
        column = _march(fld, start, 0, u_values, nu // 2, substeps, policy,
                        orientation)
        for i, p in column.items():
            grid[i, j] = p
            ok[i, j] = True

    coverage = float(ok.mean())
    dv = v_values[1] - v_values[0]
    warp = np.full((nu, nv), np.nan)
    b_grid = np.full((nu, nv), np.nan)
    metric_res = 0.0
    for i in range(nu):
        for j in range(nv):
            if not ok[i, j]:
                continue
            try:
                pt = PAPoint(fld, grid[i, j], policy, orientation, light=True)
                if pt.B is not None:
                    b_grid[i, j] = pt.B
            except (ValueError, ArithmeticError):
                continue
            if 1 < j < nv - 2 and all(ok[i, j - 2 : j + 3]):
                dpdv = (
                    grid[i, j - 2] - 8.0 * grid[i, j - 1]
                    + 8.0 * grid[i, j + 1] - grid[i, j + 2]
                ) / (12.0 * dv)
                pg = pt.pg
                tv = pg.J @ dpdv
                e1a = pg.J @ pt.e1_params
                g_uv = float(e1a @ pg.Gc @ tv)
                g_vv = float(tv @ pg.Gc @ tv)
                warp[i, j] = math.sqrt(max(g_vv, 0.0))
                metric_res = max(metric_res, abs(g_uv))
    # g_uu = |e1|^2 = 1 holds identically (flow of a unit vector); the
    # honest check is orthogonality plus the warp model below.
    du = u_values[1] - u_values[0]
    model_res = 0.0
    i0 = nu // 2
    for j in range(nv):
        if not np.isfinite(warp[:, j]).all() or not np.isfinite(b_grid[:, j]).all():
            continue
        integral = cumulative_simpson(b_grid[:, j], dx=du, initial=0.0)
        integral -= integral[i0]
        model = np.exp(integral)
        ratio = warp[:, j] / warp[i0, j]
        model_res = max(model_res, float(np.abs(ratio - model).max()))
    return AdaptedChart(seed, u_values, v_values, grid, warp, b_grid,
                        metric_res, model_res, coverage)
