"""Closed-form solution families of the constant-curvature classification.

Three kinds of one-variable profiles appear:

``F``  the integrated potential of a totally geodesic profile, solving
       F'' coth F + F'^2 + K0 = 0; under S = sinh F this becomes the
       linear equation S'' + K0 S = 0 with first integral
       S'^2 + K0 S^2 = c1 - K0.
``f``  the potential function itself, f = F'.
``B``  the single connection coefficient of the adapted frame, solving
       the Riccati equation B' + B^2 + K0 = 0.

For K0 < 0 the Riccati flow has tanh and coth orbits plus the constant
fixed points; the coth orbit is included even though classification
statements usually display only the tanh form.  ``sign = -1`` selects the
u-reflected variants (they solve the reversed equation B' = B^2 + K0 and
exist so that fits can report which orientation matched).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .jets import (
    Jet2,
    JetDomainError,
    jet_asinh,
    jet_cos,
    jet_cosh,
    jet_coth,
    jet_sin,
    jet_sinh,
    jet_sqrt,
    jet_tan,
    jet_tanh,
)

BRANCHES = ("hyperbolic", "linear", "trigonometric", "constant")


class AdmissibilityError(ValueError):
    """Family parameters violate the classification case conditions."""


class PoleError(ValueError):
    """Evaluation within the guard band of a singularity."""


POLE_GUARD = 1e-6


@dataclass(frozen=True)
class SolutionFamily:
    kind: str                 # 'F' | 'f' | 'B'
    K0: float
    c1: Optional[float] = None        # F/f kinds
    c2: Optional[float] = None        # F/f kinds
    sign: int = 1
    q: Optional[float] = None         # B kind
    branch: str = ""
    hshape: str = "tanh"              # B-kind hyperbolic sub-shape

    def __post_init__(self):
        object.__setattr__(self, "branch", self.branch or infer_branch(self))
        validate_family(self)


def infer_branch(fam: SolutionFamily) -> str:
    if fam.kind in ("F", "f"):
        if fam.K0 < 0.0:
            return "constant" if fam.c1 == 0.0 else "hyperbolic"
        return "linear" if fam.K0 == 0.0 else "trigonometric"
    if fam.K0 < 0.0:
        return "hyperbolic"
    return "linear" if fam.K0 == 0.0 else "trigonometric"


def validate_family(fam: SolutionFamily):
    if fam.kind not in ("F", "f", "B"):
        raise AdmissibilityError(f"unknown family kind {fam.kind!r}")
    if fam.branch not in BRANCHES:
        raise AdmissibilityError(f"unknown branch {fam.branch!r}")
    if fam.sign not in (1, -1):
        raise AdmissibilityError("sign must be +1 or -1")
    if fam.kind in ("F", "f"):
        if fam.c1 is None or fam.c2 is None:
            raise AdmissibilityError(f"{fam.kind}-family needs c1 and c2")
        if fam.K0 < 0.0 and fam.c1 < 0.0:
            raise AdmissibilityError("K0 < 0 requires c1 >= 0")
        if fam.K0 == 0.0 and fam.c1 <= 0.0:
            raise AdmissibilityError("K0 = 0 requires c1 > 0")
        if fam.K0 > 0.0 and fam.c1 <= fam.K0:
            raise AdmissibilityError("K0 > 0 requires c1 > K0")
        if fam.branch == "constant" and not (fam.K0 < 0.0 and fam.c1 == 0.0):
            raise AdmissibilityError("constant branch needs K0 < 0 and c1 = 0")
    else:
        if fam.q is None and fam.branch != "constant":
            raise AdmissibilityError("B-family needs q")
        if fam.branch == "constant" and fam.K0 > 0.0:
            raise AdmissibilityError("constant B branch needs K0 <= 0")
        if fam.branch == "hyperbolic" and fam.K0 >= 0.0:
            raise AdmissibilityError("hyperbolic B branch needs K0 < 0")
        if fam.branch == "trigonometric" and fam.K0 <= 0.0:
            raise AdmissibilityError("trigonometric B branch needs K0 > 0")
        if fam.branch == "linear" and fam.K0 != 0.0:
            raise AdmissibilityError("linear B branch needs K0 = 0")
        if fam.hshape not in ("tanh", "coth"):
            raise AdmissibilityError("hshape must be 'tanh' or 'coth'")


def _uj(u):
    return Jet2.variable(float(u), 0, 1)


def _f_profile_jet(fam: SolutionFamily, uj: Jet2) -> Jet2:
    K0, c1, c2, s = fam.K0, fam.c1, fam.c2, float(fam.sign)
    if fam.K0 < 0.0:
        if c1 == 0.0:
            return Jet2.constant(s * math.sqrt(-K0), 1)
        a2 = (c1 - K0) / (-K0)
        xi = (uj + c2) * (s * math.sqrt(-K0))
        sh = jet_sinh(xi)
        return (math.sqrt(c1 - K0) * s) * jet_cosh(xi) / jet_sqrt(
            1.0 + a2 * sh * sh
        )
    if K0 == 0.0:
        arg = uj * (s * math.sqrt(c1)) + c2
        return (s * math.sqrt(c1)) / jet_sqrt(1.0 + arg * arg)
    b2 = (c1 - K0) / K0
    eta = (uj + c2) * math.sqrt(K0)
    sn = jet_sin(eta)
    return math.sqrt(c1 - K0) * jet_cos(eta) / jet_sqrt(1.0 + b2 * sn * sn)


def _F_profile_jet(fam: SolutionFamily, uj: Jet2) -> Jet2:
    K0, c1, c2, s = fam.K0, fam.c1, fam.c2, float(fam.sign)
    if K0 < 0.0:
        if c1 == 0.0:
            return uj * (s * math.sqrt(-K0)) + s * math.sqrt(-K0) * c2
        a = math.sqrt((c1 - K0) / (-K0))
        return jet_asinh(a * jet_sinh((uj + c2) * (s * math.sqrt(-K0))))
    if K0 == 0.0:
        return jet_asinh(uj * (s * math.sqrt(c1)) + c2)
    b = math.sqrt((c1 - K0) / K0)
    return jet_asinh(b * jet_sin((uj + c2) * math.sqrt(K0)))


def _B_profile_jet(fam: SolutionFamily, uj: Jet2) -> Jet2:
    K0, s = fam.K0, float(fam.sign)
    if fam.branch == "constant":
        return Jet2.constant(s * math.sqrt(-K0), 1)
    q = fam.q
    if fam.branch == "linear":
        arg = uj * s + q
        if abs(arg.value) <= POLE_GUARD:
            raise PoleError(f"pole of 1/(u + q) at u = {uj.value!r} (q = {q!r})")
        return 1.0 / arg
    if fam.branch == "trigonometric":
        r = math.sqrt(K0)
        arg = uj * (-s * r) + q
        if abs(math.cos(arg.value)) <= POLE_GUARD:
            raise PoleError(f"tan pole near u = {uj.value!r}")
        return r * jet_tan(arg)
    r = math.sqrt(-K0)
    arg = uj * (s * r) + q
    if fam.hshape == "tanh":
        return r * jet_tanh(arg)
    if abs(arg.value) <= POLE_GUARD:
        raise PoleError(f"coth pole near u = {uj.value!r}")
    return r * jet_coth(arg)


def family_eval(fam: SolutionFamily, u):
    """(value, first, second derivative) of the family profile at ``u``.

    Derivatives come from jets of the closed form.  Near a pole of the
    profile a :class:`PoleError` names the singularity.
    """
    uj = _uj(u)
    if fam.kind == "F":
        jet = _F_profile_jet(fam, uj)
    elif fam.kind == "f":
        jet = _f_profile_jet(fam, uj)
    else:
        jet = _B_profile_jet(fam, uj)
    return jet.value, float(jet.grad[0]), float(jet.hess[0, 0])


def family_values(fam: SolutionFamily, us):
    """Vectorized profile values (no derivatives, no pole guard: poles
    surface as non-finite entries)."""
    u = np.asarray(us, dtype=float)
    K0, s = fam.K0, float(fam.sign)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if fam.kind == "F":
            if K0 < 0.0:
                if fam.c1 == 0.0:
                    return s * math.sqrt(-K0) * (u + fam.c2)
                a = math.sqrt((fam.c1 - K0) / (-K0))
                return np.arcsinh(a * np.sinh(s * math.sqrt(-K0) * (u + fam.c2)))
            if K0 == 0.0:
                return np.arcsinh(s * math.sqrt(fam.c1) * u + fam.c2)
            b = math.sqrt((fam.c1 - K0) / K0)
            return np.arcsinh(b * np.sin(math.sqrt(K0) * (u + fam.c2)))
        if fam.kind == "f":
            if K0 < 0.0:
                if fam.c1 == 0.0:
                    return np.full_like(u, s * math.sqrt(-K0))
                a2 = (fam.c1 - K0) / (-K0)
                xi = s * math.sqrt(-K0) * (u + fam.c2)
                return (s * math.sqrt(fam.c1 - K0) * np.cosh(xi)
                        / np.sqrt(1.0 + a2 * np.sinh(xi) ** 2))
            if K0 == 0.0:
                arg = s * math.sqrt(fam.c1) * u + fam.c2
                return s * math.sqrt(fam.c1) / np.sqrt(1.0 + arg * arg)
            b2 = (fam.c1 - K0) / K0
            eta = math.sqrt(K0) * (u + fam.c2)
            return (math.sqrt(fam.c1 - K0) * np.cos(eta)
                    / np.sqrt(1.0 + b2 * np.sin(eta) ** 2))
        # B-kind
        if fam.branch == "constant":
            return np.full_like(u, s * math.sqrt(-K0))
        if fam.branch == "linear":
            return 1.0 / (s * u + fam.q)
        if fam.branch == "trigonometric":
            r = math.sqrt(K0)
            return r * np.tan(fam.q - s * r * u)
        r = math.sqrt(-K0)
        arg = fam.q + s * r * u
        return r * (np.tanh(arg) if fam.hshape == "tanh" else 1.0 / np.tanh(arg))


# -- defining-equation residuals -------------------------------------------------


@dataclass(frozen=True)
class OdeResidualReport:
    samples: tuple        # (u, residual) pairs
    max_abs: float


def ode_residual(fam: SolutionFamily, us) -> OdeResidualReport:
    """max |F'' coth F + F'^2 + K0| over the samples (F-kind only)."""
    if fam.kind != "F":
        raise ValueError("ode_residual applies to F-kind families")
    out = []
    for u in np.asarray(us, dtype=float):
        F, Fp, Fpp = family_eval(fam, u)
        if abs(math.sinh(F)) < POLE_GUARD:
            raise PoleError(f"coth pole: F({u!r}) = {F!r} is too close to 0")
        res = Fpp / math.tanh(F) + Fp * Fp + fam.K0
        out.append((float(u), abs(res)))
    return OdeResidualReport(tuple(out), max(r for _, r in out))


def s_form_check(fam: SolutionFamily, us):
    """(max |S'' + K0 S|, max |S'^2 + K0 S^2 - (c1 - K0)|) with S = sinh F."""
    if fam.kind != "F":
        raise ValueError("s_form_check applies to F-kind families")
    r1 = r2 = 0.0
    for u in np.asarray(us, dtype=float):
        F, Fp, Fpp = family_eval(fam, u)
        S = math.sinh(F)
        Sp = Fp * math.cosh(F)
        Spp = Fpp * math.cosh(F) + Fp * Fp * math.sinh(F)
        r1 = max(r1, abs(Spp + fam.K0 * S))
        r2 = max(r2, abs(Sp * Sp + fam.K0 * S * S - (fam.c1 - fam.K0)))
    return r1, r2


def b_family_residual(fam: SolutionFamily, us) -> OdeResidualReport:
    """max |B' + B^2 + K0| over the samples (B-kind only)."""
    if fam.kind != "B":
        raise ValueError("b_family_residual applies to B-kind families")
    out = []
    for u in np.asarray(us, dtype=float):
        B, Bp, _ = family_eval(fam, u)
        out.append((float(u), abs(Bp + B * B + fam.K0)))
    return OdeResidualReport(tuple(out), max(r for _, r in out))


# -- Runge-Kutta oracle -----------------------------------------------------------


@dataclass(frozen=True)
class OracleTrace:
    us: np.ndarray
    S: np.ndarray
    Sp: np.ndarray

    def F(self):
        return np.arcsinh(self.S)


def ode_oracle(K0, u0, s0, sp0, u1, step=1e-3) -> OracleTrace:
    """Classic fixed-step RK4 on the regularized form S'' = -K0 S.

    Integrating S rather than F avoids the coth pole at F = 0; global
    error is O(step^4).
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    span = u1 - u0
    nsteps = max(1, int(round(abs(span) / step)))
    h = span / nsteps
    us = np.empty(nsteps + 1)
    S = np.empty(nsteps + 1)
    Sp = np.empty(nsteps + 1)
    us[0], S[0], Sp[0] = u0, s0, sp0
    y = np.array([s0, sp0], dtype=float)

    def rhs(yv):
        return np.array([yv[1], -K0 * yv[0]])

    for i in range(nsteps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y).all():
            raise OverflowError(f"oracle state overflow at step {i}")
        us[i + 1] = u0 + (i + 1) * h
        S[i + 1], Sp[i + 1] = y
    return OracleTrace(us, S, Sp)


def oracle_vs_family(fam: SolutionFamily, u0, u1, step=1e-3) -> float:
    """max |F_oracle - F_family| over the trace, seeding the oracle from the
    family's own initial data."""
    if fam.kind != "F":
        raise ValueError("oracle comparison applies to F-kind families")
    F0, Fp0, _ = family_eval(fam, u0)
    s0 = math.sinh(F0)
    sp0 = Fp0 * math.cosh(F0)
    trace = ode_oracle(fam.K0, u0, s0, sp0, u1, step)
    exact = family_values(fam, trace.us)
    return float(np.abs(trace.F() - exact).max())


# -- profile of a totally geodesic angle function -----------------------------------


def totally_geodesic_theta(fam: SolutionFamily, us):
    """theta(u) = arccos(sech F(u)) and K_int(u) = -(F'' coth F + F'^2)."""
    if fam.kind != "F":
        raise ValueError("totally_geodesic_theta applies to F-kind families")
    thetas = []
    kints = []
    for u in np.asarray(us, dtype=float):
        F, Fp, Fpp = family_eval(fam, u)
        thetas.append(math.acos(1.0 / math.cosh(F)))
        if abs(math.sinh(F)) < POLE_GUARD:
            raise PoleError(f"K_int pole: F({u!r}) too close to 0")
        kints.append(-(Fpp / math.tanh(F) + Fp * Fp))
    return np.array(thetas), np.array(kints)


# -- fitting ---------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    family: Optional[SolutionFamily]
    rms: float
    status: str                  # 'ok' | 'unclassified'
    candidates: tuple            # (branch label, rms) diagnostics, sorted


def _rms(fam, us, ys):
    try:
        pred = family_values(fam, us)
    except (PoleError, JetDomainError, AdmissibilityError, OverflowError):
        return math.inf
    if not np.isfinite(pred).all():
        return math.inf
    return float(np.sqrt(np.mean((pred - ys) ** 2)))


def _refine(make_family, x0, us, ys, bounds):
    def resid(x):
        try:
            fam = make_family(x)
            pred = family_values(fam, us)
        except (PoleError, JetDomainError, AdmissibilityError, OverflowError):
            return np.full(len(us), 1e6)
        if not np.isfinite(pred).all():
            return np.full(len(us), 1e6)
        return pred - ys

    try:
        sol = least_squares(resid, x0, bounds=bounds, method="trf",
                            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400)
    except ValueError:
        return None
    try:
        fam = make_family(sol.x)
    except AdmissibilityError:
        return None
    return fam


def _fit_constant(us, ys, kind):
    mean = float(np.mean(ys))
    spread = float(np.max(ys) - np.min(ys))
    if spread > 1e-7 * max(1.0, abs(mean)):
        return None
    K0 = -mean * mean
    sgn = 1 if mean >= 0.0 else -1
    if kind == "f":
        if mean == 0.0:
            return None
        return SolutionFamily("f", K0, c1=0.0, c2=0.0, sign=sgn)
    return SolutionFamily("B", K0, q=0.0, sign=sgn, branch="constant")


def _b_candidates(us, ys):
    """Deterministic seeds (branch, make_family, x0, bounds) for B-kind data."""
    dy = np.gradient(ys, us)
    k0_est = float(np.median(-(dy + ys * ys)))
    cands = []
    tiny = 1e-12

    for s in (1, -1):
        su = s * us
        # linear: B = 1/(s u + q)
        if np.all(np.abs(ys) > 1e-12):
            q0 = float(np.median(1.0 / ys - su))
            cands.append((
                f"linear s={s}",
                lambda x, s=s: SolutionFamily("B", 0.0, q=float(x[0]), sign=s),
                [q0], ([-np.inf], [np.inf]),
            ))
        # hyperbolic (tanh and coth orbits)
        if k0_est < -tiny:
            r = math.sqrt(-k0_est)
            w = ys / r
            if np.max(np.abs(w)) < 1.0 - 1e-9:
                q0 = float(np.median(np.arctanh(w) - r * su))
                cands.append((
                    f"hyperbolic tanh s={s}",
                    lambda x, s=s: SolutionFamily(
                        "B", -abs(x[0]), q=float(x[1]), sign=s, hshape="tanh"),
                    [-k0_est, q0], ([tiny, -np.inf], [np.inf, np.inf]),
                ))
            if np.min(np.abs(w)) > 1.0 + 1e-9 and len(set(np.sign(w))) == 1:
                q0 = float(np.median(np.arctanh(1.0 / w) - r * su))
                cands.append((
                    f"hyperbolic coth s={s}",
                    lambda x, s=s: SolutionFamily(
                        "B", -abs(x[0]), q=float(x[1]), sign=s, hshape="coth"),
                    [-k0_est, q0], ([tiny, -np.inf], [np.inf, np.inf]),
                ))
        # trigonometric
        if k0_est > tiny:
            r = math.sqrt(k0_est)
            q0 = float(np.median(np.arctan(ys / r) + r * su))
            cands.append((
                f"trigonometric s={s}",
                lambda x, s=s: SolutionFamily(
                    "B", abs(x[0]), q=float(x[1]), sign=s),
                [k0_est, q0], ([tiny, -np.inf], [np.inf, np.inf]),
            ))
    return cands


def _f_candidates(us, ys):
    cands = []
    tiny = 1e-12
    s = 1 if float(np.median(ys)) >= 0.0 else -1
    fs2 = ys * ys
    if np.all(np.abs(ys) > 1e-12):
        # K0 = 0 exact seed: 1/f^2 - u^2 is linear in u
        w = 1.0 / fs2 - us * us
        alpha, beta = np.polyfit(us, w, 1)
        denom = beta - 0.25 * alpha * alpha
        if denom > tiny:
            c1_0 = 1.0 / denom
            c2_0 = s * 0.5 * alpha * math.sqrt(c1_0)
            cands.append((
                "linear",
                lambda x, s=s: SolutionFamily(
                    "f", 0.0, c1=abs(x[0]), c2=float(x[1]), sign=s),
                [c1_0, c2_0], ([tiny, -np.inf], [np.inf, np.inf]),
            ))
    # K0 != 0: c2 seed puts the |f| maximum at the profile center
    i_star = int(np.argmax(np.abs(ys)))
    u_star = float(us[i_star])
    lo = -float(np.min(fs2))
    span = max(float(np.max(fs2) - np.min(fs2)), 0.1 * float(np.max(fs2)), tiny)
    for frac in (0.05, 0.25, 1.0, 4.0):
        K0_neg = lo - frac * span
        c1_seed = max(float(np.max(fs2)) + K0_neg, tiny) * 1.05
        if c1_seed > 0:
            cands.append((
                f"hyperbolic K0~{K0_neg:.3g}",
                lambda x, s=s: SolutionFamily(
                    "f", -abs(x[0]), c1=abs(x[1]), c2=float(x[2]), sign=s),
                [-K0_neg, c1_seed, -u_star],
                ([tiny, tiny, -np.inf], [np.inf, np.inf, np.inf]),
            ))
        K0_pos = frac * span
        c1_seed = float(np.max(fs2)) + K0_pos
        cands.append((
            f"trigonometric K0~{K0_pos:.3g}",
            lambda x: SolutionFamily(
                "f", abs(x[0]), c1=abs(x[0]) + abs(x[1]), c2=float(x[2]), sign=1),
            [K0_pos, c1_seed - K0_pos, -u_star],
            ([tiny, tiny, -np.inf], [np.inf, np.inf, np.inf]),
        ))
    return cands


def family_fit(us, ys, kind, rms_tol=1e-3) -> FitResult:
    """Best-branch nonlinear least squares for sampled f(u) or B(u) data.

    Branch seeds: K0 from the Riccati residual of the differenced data,
    closed-form seeds for the K0 = 0 branches, the |f| maximum for the
    phase; each candidate is polished with bounded Levenberg-Marquardt.
    """
    us = np.asarray(us, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if us.shape != ys.shape or us.ndim != 1:
        raise ValueError("need matching 1-d sample arrays")
    if len(us) < 8:
        raise ValueError("need at least 8 samples")
    if np.any(np.diff(us) <= 0.0):
        raise ValueError("u-grid must be strictly increasing")
    if kind not in ("f", "B"):
        raise ValueError("family_fit handles kinds 'f' and 'B'")

    scored = []
    const = _fit_constant(us, ys, kind)
    if const is not None:
        scored.append(("constant", const, _rms(const, us, ys), 0))

    cands = _b_candidates(us, ys) if kind == "B" else _f_candidates(us, ys)
    for label, make, x0, bounds in cands:
        fam = _refine(make, x0, us, ys, bounds)
        if fam is None:
            continue
        scored.append((label, fam, _rms(fam, us, ys), len(x0)))

    scored.sort(key=lambda t: (t[2], t[3], t[0]))
    diag = tuple((label, rms) for label, _, rms, _ in scored)
    if not scored or not math.isfinite(scored[0][2]):
        return FitResult(None, math.inf, "unclassified", diag)
    # prefer fewer free parameters among essentially-exact candidates
    # (a hyperbolic branch with c1 -> 0 shadows the constant one)
    tie = max(2.0 * scored[0][2], 1e-10 * max(1.0, float(np.abs(ys).max())))
    ties = [t for t in scored if t[2] <= tie]
    ties.sort(key=lambda t: (t[3], t[2], t[0]))
    label, best, rms, _ = ties[0]
    if rms > rms_tol:
        return FitResult(None, rms, "unclassified", diag)
    return FitResult(best, rms, "ok", diag)
