"""Expression language: parsing, printing, evaluation, diagnostics."""

import math
import random

import numpy as np
import pytest

from pasurf.exprs import (Bin, Call, ExprError, Neg, Num, Var, compile_field,
                          eval_jet, parse, print_expr, substitute, variables)
from pasurf.jets import Jet2, JetDomainError, fd_oracle

from conftest import random_expression
from expr_corpus import CORPUS, CORPUS_BOX, CORPUS_NAMES


def test_simple_eval():
    fld = compile_field(parse("1/(z*z)", ["x", "y", "z"]), ["x", "y", "z"])
    assert fld.eval([0.0, 0.0, 2.0]).value == 0.25


def test_hemisphere_parametrization_parses():
    e = parse("r*cos(asin(sech(u)))*cos(v)", ["u", "v", "r"])
    fld = compile_field(e, ["u", "v"], {"r": 1.0})
    # cos(asin(sech u)) = tanh u for u > 0
    u = 0.8
    assert fld.eval([u, 0.0]).value == pytest.approx(math.tanh(u), abs=1e-15)


def test_unbalanced_paren_diagnostic_offset():
    src = "sech(q - sqrt(2)*u"
    with pytest.raises(ExprError) as err:
        parse(src, ["u", "q"])
    assert err.value.offset == len(src)
    assert "^" in str(err.value)


def test_unknown_identifier_offset():
    with pytest.raises(ExprError) as err:
        parse("x + qq*y", ["x", "y"])
    assert err.value.offset == 4


def test_unknown_function_and_arity():
    with pytest.raises(ExprError):
        parse("foo(x)", ["x"])
    with pytest.raises(ExprError) as err:
        parse("sin(x, y)", ["x", "y"])
    assert "exactly one argument" in err.value.message


def test_precedence():
    # ^ binds tighter than unary minus, right-associative
    e = parse("-x^2", ["x"])
    assert isinstance(e, Neg) and isinstance(e.arg, Bin) and e.arg.op == "^"
    two_pow = compile_field(parse("2^3^2", []), [], {})
    assert two_pow.eval(np.zeros(0)).value == 512.0
    assert compile_field(parse("2*-3", []), [], {}).eval(np.zeros(0)).value == -6.0
    e = parse("a - b - c", ["a", "b", "c"])
    assert e.op == "-" and isinstance(e.left, Bin)   # left-assoc


def test_roundtrip_on_corpus():
    for src in CORPUS:
        ast = parse(src, CORPUS_NAMES)
        assert parse(print_expr(ast), CORPUS_NAMES) == ast


def test_roundtrip_random():
    rng = random.Random(123)
    for _ in range(200):
        src = random_expression(rng, ["x", "y"], depth=4)
        ast = parse(src, ["x", "y"])
        printed = print_expr(ast)
        assert parse(printed, ["x", "y"]) == ast
        # printing is idempotent through a second cycle
        assert print_expr(parse(printed, ["x", "y"])) == printed


def test_sech_jet_at_zero():
    fld = compile_field(parse("sech(u)", ["u"]), ["u"])
    jet = fld.eval([0.0])
    assert jet.value == 1.0
    assert jet.grad[0] == pytest.approx(0.0, abs=1e-16)
    assert jet.hess[0, 0] == pytest.approx(-1.0, abs=1e-15)


def test_square_sum_gradient():
    fld = compile_field(parse("x^2 + y^2", ["x", "y"]), ["x", "y"])
    jet = fld.eval([1.5, -2.0])
    assert np.allclose(jet.grad, [3.0, -4.0], atol=1e-14)


def test_corpus_against_fd_oracle():
    rng = random.Random(7)
    lo, hi = CORPUS_BOX
    worst_g = worst_h = 0.0
    for src in CORPUS:
        fld = compile_field(parse(src, CORPUS_NAMES), CORPUS_NAMES)
        for _ in range(3):
            p = np.array([rng.uniform(lo, hi) for _ in CORPUS_NAMES])
            jet = fld.eval(p)
            scale = 1.0 + abs(jet.value)
            g = fd_oracle(fld, p, order=1).data
            H = fd_oracle(fld, p, order=2).data
            worst_g = max(worst_g, float(np.abs(jet.grad - g).max() / scale))
            worst_h = max(worst_h, float(np.abs(jet.hess - H).max() / scale))
    assert worst_g <= 1e-6
    assert worst_h <= 1e-4


def test_domain_error_carries_node_location():
    fld = compile_field(parse("1 + log(x - 5)", ["x"]), ["x"])
    with pytest.raises(JetDomainError) as err:
        fld.eval([1.0])
    assert "log" in str(err.value) and "offset 4" in str(err.value)


def test_no_silent_nan():
    for src, point in [("sqrt(x)", [-1.0]), ("csch(x)", [0.0]),
                       ("acos(x)", [2.0]), ("x/(x - 1)", [1.0])]:
        fld = compile_field(parse(src, ["x"]), ["x"])
        with pytest.raises(JetDomainError):
            fld.eval(np.array(point))


def test_substitution():
    ast = parse("z + sin(z)", ["z"])
    sub = substitute(ast, {"z": parse("u*v", ["u", "v"])})
    assert variables(sub) == {"u", "v"}
    fld = compile_field(sub, ["u", "v"])
    assert fld.eval([2.0, 3.0]).value == pytest.approx(6.0 + math.sin(6.0))


def test_compile_rejects_free_variables():
    with pytest.raises(ValueError):
        compile_field(parse("x + y", ["x", "y"]), ["x"])


def test_constants_bound_with_zero_derivative():
    fld = compile_field(parse("r*u", ["u", "r"]), ["u"], {"r": 3.0})
    jet = fld.eval([2.0])
    assert jet.value == 6.0 and jet.grad[0] == 3.0


def test_power_forms():
    # integer exponent allows negative base; fractional demands positive
    fld = compile_field(parse("x^3", ["x"]), ["x"])
    assert fld.eval([-2.0]).value == -8.0
    frac = compile_field(parse("x^1.5", ["x"]), ["x"])
    with pytest.raises(JetDomainError):
        frac.eval([-2.0])
    general = compile_field(parse("x^y", ["x", "y"]), ["x", "y"])
    jet = general.eval([2.0, 3.0])
    assert jet.value == pytest.approx(8.0, rel=1e-14)
    with pytest.raises(JetDomainError):
        general.eval([-2.0, 3.0])
