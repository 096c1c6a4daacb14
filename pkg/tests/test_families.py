"""Closed-form families: defining ODEs, oracle, fitting, profile identities."""

import math

import numpy as np
import pytest

from pasurf.families import (AdmissibilityError, PoleError, SolutionFamily,
                             b_family_residual, family_eval, family_fit,
                             family_values, ode_oracle, ode_residual,
                             oracle_vs_family, s_form_check,
                             totally_geodesic_theta)

RNG = np.random.default_rng(424242)


def random_admissible(branch, rng=RNG):
    if branch == "hyperbolic":
        K0 = -rng.uniform(0.1, 3.0)
        c1 = rng.uniform(0.0, 3.0)
    elif branch == "linear":
        K0 = 0.0
        c1 = rng.uniform(0.05, 3.0)
    else:
        K0 = rng.uniform(0.1, 1.5)
        c1 = K0 + rng.uniform(0.05, 3.0)
    c2 = rng.uniform(-0.5, 0.5)
    sign = 1 if rng.random() < 0.5 else -1
    if branch == "trigonometric":
        sign = 1
    return SolutionFamily("F", K0, c1=c1, c2=c2, sign=sign)


def safe_samples(fam, lo=0.05, hi=2.0, count=1000):
    """Sample grid avoiding the coth pole at F = 0."""
    us = np.linspace(lo, hi, count)
    F = family_values(fam, us)
    return us[np.abs(np.sinh(F)) > 0.05]


def test_constant_slope_profile_is_exact():
    fam = SolutionFamily("F", -1.0, c1=0.0, c2=0.0)
    us = np.linspace(0.1, 2.0, 200)
    assert ode_residual(fam, us).max_abs <= 1e-12
    r1, r2 = s_form_check(fam, us)
    assert r1 <= 1e-12 and r2 <= 1e-12
    vals = family_values(fam, us)
    assert np.abs(vals - us).max() <= 1e-15          # F(u) = u


@pytest.mark.parametrize("branch", ["hyperbolic", "linear", "trigonometric"])
def test_ode_residual_random_admissible(branch):
    for _ in range(20):
        fam = random_admissible(branch)
        us = safe_samples(fam)
        if len(us) < 100:
            continue
        assert ode_residual(fam, us).max_abs <= 1e-8
        r1, r2 = s_form_check(fam, us)
        assert r1 <= 1e-9 and r2 <= 1e-9


def test_negative_control_sensitivity():
    """Perturbed parameters are detected.

    A c1 shift produces another solution of the same second-order ODE (c1
    is an integration constant), so the probe pins the first-integral
    constant; a K0 shift changes the ODE itself.
    """
    fam = SolutionFamily("F", -1.0, c1=1.0, c2=0.0)
    us = safe_samples(fam)
    assert s_form_check(fam, us)[1] <= 1e-9
    # first-integral residual against c1 off by 1e-2
    worst = 0.0
    for u in us[:50]:
        F, Fp, _ = family_eval(fam, u)
        S, Sp = math.sinh(F), Fp * math.cosh(F)
        worst = max(worst, abs(Sp**2 + fam.K0 * S**2 - (1.01 - fam.K0)))
    assert worst > 1e-4
    # ODE residual against K0 off by 1e-2
    worst = 0.0
    for u in us[:50]:
        F, Fp, Fpp = family_eval(fam, u)
        worst = max(worst, abs(Fpp / math.tanh(F) + Fp * Fp + (fam.K0 + 0.01)))
    assert worst > 1e-4


def test_b_family_residuals():
    cases = [
        SolutionFamily("B", 0.0, q=0.0),
        SolutionFamily("B", 2.0, q=0.3),
        SolutionFamily("B", -1.5, q=0.2, hshape="tanh"),
        SolutionFamily("B", -1.5, q=0.2, hshape="coth"),
        SolutionFamily("B", -0.7, branch="constant", sign=-1),
    ]
    us = np.linspace(0.3, 1.2, 200)
    for fam in cases:
        assert b_family_residual(fam, us).max_abs <= 1e-9


def test_reflected_variant_solves_reversed_equation():
    fam = SolutionFamily("B", -1.0, q=0.2, sign=-1)
    us = np.linspace(0.3, 1.2, 100)
    # forward residual is large ...
    assert b_family_residual(fam, us).max_abs > 0.1
    # ... but B' - B^2 - K0 vanishes
    worst = 0.0
    for u in us:
        B, Bp, _ = family_eval(fam, u)
        worst = max(worst, abs(Bp - B * B - fam.K0))
    assert worst <= 1e-9


def test_sign_variant_reparametrization():
    """The q - ru variant is the q + ru one with u reflected; combining
    with the oddness of tanh gives the q -> -q, overall-sign form."""
    K0, q = -1.3, 0.4
    plus = SolutionFamily("B", K0, q=q, sign=1)
    minus = SolutionFamily("B", K0, q=q, sign=-1)
    us = np.linspace(-1.0, 1.0, 41)
    assert np.abs(family_values(minus, us) - family_values(plus, -us)).max() <= 1e-14
    neg_q = SolutionFamily("B", K0, q=-q, sign=-1)
    assert np.abs(family_values(neg_q, us) + family_values(plus, us)).max() <= 1e-14


def test_family_eval_derivatives_match_fd():
    fam = SolutionFamily("f", -0.8, c1=1.4, c2=0.2)
    h = 1e-5
    for u in (0.3, 0.9, 1.7):
        val, d1, d2 = family_eval(fam, u)
        vp = family_eval(fam, u + h)[0]
        vm = family_eval(fam, u - h)[0]
        assert d1 == pytest.approx((vp - vm) / (2 * h), abs=1e-8)
        assert d2 == pytest.approx((vp - 2 * val + vm) / h**2, abs=1e-5)


def test_f_kind_is_derivative_of_F():
    for branch in ("hyperbolic", "linear", "trigonometric"):
        famF = random_admissible(branch)
        famf = SolutionFamily("f", famF.K0, c1=famF.c1, c2=famF.c2,
                              sign=famF.sign)
        for u in (0.2, 0.8, 1.4):
            _, dF, _ = family_eval(famF, u)
            fval, _, _ = family_eval(famf, u)
            assert fval == pytest.approx(dF, abs=1e-11)


def test_pole_guards():
    lin = SolutionFamily("B", 0.0, q=-1.0)
    with pytest.raises(PoleError):
        family_eval(lin, 1.0)
    trig = SolutionFamily("B", 1.0, q=math.pi / 2)
    with pytest.raises(PoleError):
        family_eval(trig, 0.0)
    fam = SolutionFamily("F", -1.0, c1=0.0, c2=0.0)
    with pytest.raises(PoleError):
        ode_residual(fam, [0.0])


def test_admissibility_conditions():
    with pytest.raises(AdmissibilityError):
        SolutionFamily("F", -1.0, c1=-0.5, c2=0.0)
    with pytest.raises(AdmissibilityError):
        SolutionFamily("F", 0.0, c1=0.0, c2=0.0)
    with pytest.raises(AdmissibilityError):
        SolutionFamily("F", 0.5, c1=0.2, c2=0.0)     # needs c1 > K0
    with pytest.raises(AdmissibilityError):
        SolutionFamily("B", 1.0, q=0.0, branch="hyperbolic")
    with pytest.raises(AdmissibilityError):
        SolutionFamily("B", 1.0, branch="constant")
    with pytest.raises(AdmissibilityError):
        SolutionFamily("Q", 1.0, c1=2.0, c2=0.0)


def test_rk4_oracle():
    # exact on linear solutions
    trace = ode_oracle(0.0, 0.0, 0.5, 1.0, 2.0, step=1e-2)
    assert np.abs(trace.S - (0.5 + trace.us)).max() <= 1e-14

    # K0 = 1, c1 = 2 closed form vs oracle
    fam = SolutionFamily("F", 1.0, c1=2.0, c2=0.0)
    assert oracle_vs_family(fam, 0.1, 2.0, step=1e-3) <= 1e-6

    # S-route regularizes F = 0 (starting exactly at the coth pole)
    fam2 = SolutionFamily("F", -1.0, c1=0.0, c2=0.0)
    dev = oracle_vs_family(fam2, 0.0, 1.0, step=1e-3)
    assert dev <= 1e-9

    with pytest.raises(ValueError):
        ode_oracle(1.0, 0.0, 0.0, 1.0, 1.0, step=0.0)


def test_oracle_agreement_random_branches():
    for branch in ("hyperbolic", "linear", "trigonometric"):
        for _ in range(5):
            fam = random_admissible(branch)
            assert oracle_vs_family(fam, 0.1, 2.0, step=1e-3) <= 1e-6


def test_totally_geodesic_theta_profiles():
    fam = SolutionFamily("F", -1.0, c1=0.0, c2=0.0)      # F(u) = u
    us = np.linspace(0.2, 2.5, 100)
    theta, kint = totally_geodesic_theta(fam, us)
    assert np.abs(theta - np.arccos(1.0 / np.cosh(us))).max() <= 1e-12
    assert np.abs(kint + 1.0).max() <= 1e-12

    fam0 = SolutionFamily("f", 0.0, c1=1.0, c2=0.0)
    vals = family_values(fam0, us)
    assert np.abs(vals - 1.0 / np.sqrt(1.0 + us * us)).max() <= 1e-14
    famF0 = SolutionFamily("F", 0.0, c1=1.0, c2=0.0)     # F = asinh(u)
    theta0, kint0 = totally_geodesic_theta(famF0, us)
    assert np.abs(np.cos(theta0) - 1.0 / np.sqrt(1.0 + us * us)).max() <= 1e-12
    assert np.abs(kint0).max() <= 1e-12


def test_reciprocal_relations_from_theta():
    """f = theta' sec(theta); K_int = -((log tan theta)'' + ((log tan theta)')^2)."""
    fam = SolutionFamily("F", -0.7, c1=0.9, c2=0.1)
    us = np.linspace(0.4, 1.6, 9)
    h = 1e-4

    def theta_at(u):
        F = family_values(fam, [u])[0]
        return math.acos(1.0 / math.cosh(F))

    def logtan_at(u):
        return math.log(math.tan(theta_at(u)))

    for u in us:
        th = theta_at(u)
        thp = (theta_at(u + h) - theta_at(u - h)) / (2 * h)
        fval = family_eval(SolutionFamily("f", fam.K0, c1=fam.c1, c2=fam.c2),
                           u)[0]
        assert fval == pytest.approx(thp / math.cos(th), abs=1e-6)
        lt_p = (logtan_at(u + h) - logtan_at(u - h)) / (2 * h)
        lt_pp = (logtan_at(u + h) - 2 * logtan_at(u) + logtan_at(u - h)) / h**2
        _, kint = totally_geodesic_theta(fam, [u])
        assert kint[0] == pytest.approx(-(lt_pp + lt_p * lt_p), abs=1e-5)


def test_fit_examples():
    us = np.linspace(0.1, 5.0, 60)
    fit = family_fit(us, 1.0 / np.sqrt(1.0 + us**2), "f")
    assert fit.status == "ok"
    assert fit.family.K0 == pytest.approx(0.0, abs=1e-9)
    assert fit.family.c1 == pytest.approx(1.0, abs=1e-6)
    assert fit.family.c2 == pytest.approx(0.0, abs=1e-6)

    us2 = np.linspace(0.2, 3.0, 60)
    fitb = family_fit(us2, 1.0 / np.tanh(us2), "B")
    assert fitb.status == "ok"
    assert fitb.family.branch == "hyperbolic" and fitb.family.hshape == "coth"
    assert fitb.family.K0 == pytest.approx(-1.0, abs=1e-6)

    fitc = family_fit(us, 1.0 / us, "B")
    assert fitc.family.branch == "linear"
    assert fitc.family.K0 == 0.0
    assert fitc.family.q == pytest.approx(0.0, abs=1e-9)

    fitk = family_fit(us, np.ones_like(us), "f")
    assert fitk.family.branch == "constant"
    assert fitk.family.K0 == pytest.approx(-1.0, abs=1e-9)


def test_fit_round_trip_random():
    rng = np.random.default_rng(99)
    for kind in ("f", "B"):
        for branch in ("hyperbolic", "linear", "trigonometric"):
            done = 0
            while done < 4:
                if kind == "f":
                    fam = random_admissible(branch)
                    fam = SolutionFamily("f", fam.K0, c1=max(fam.c1, 0.05),
                                         c2=fam.c2, sign=1)
                else:
                    q = rng.uniform(-0.5, 0.5)
                    if branch == "linear":
                        fam = SolutionFamily("B", 0.0, q=abs(q) + 0.05)
                    elif branch == "trigonometric":
                        fam = SolutionFamily("B", rng.uniform(0.2, 2.0), q=q)
                    else:
                        fam = SolutionFamily("B", -rng.uniform(0.2, 2.0), q=q)
                us = np.linspace(0.1, 2.0, 40)
                ys = family_values(fam, us)
                if not np.isfinite(ys).all() or np.abs(ys).max() > 50:
                    continue
                fit = family_fit(us, ys, kind)
                assert fit.status == "ok", (fam, fit.candidates[:3])
                assert fit.rms <= 1e-5, (fam, fit.rms)
                done += 1


def test_fit_unclassified_on_garbage():
    us = np.linspace(0.1, 2.0, 40)
    fit = family_fit(us, np.sin(5 * us) + 2.0, "B")
    assert fit.status == "unclassified"
    assert fit.family is None

    with pytest.raises(ValueError):
        family_fit(us[:5], np.ones(5), "B")
    with pytest.raises(ValueError):
        family_fit(us[::-1], np.ones_like(us), "B")
