"""Arithmetic expression language for scene files.

Grammar (highest precedence first):

    ^           right-associative power
    unary -     negation
    * /         left-associative
    + -         left-associative

plus parentheses and single-argument calls from a fixed function set.
Identifiers must be declared up front (coordinates, parameters, named
constants); ``pi`` and ``e`` are built in.  Parsed trees evaluate over
``Jet2`` bindings, so every expression carries exact first and second
derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .jets import (
    Jet2,
    JetDomainError,
    ScalarField,
    jet_abs,
    jet_acos,
    jet_asin,
    jet_asinh,
    jet_atan,
    jet_cos,
    jet_cosh,
    jet_coth,
    jet_csch,
    jet_exp,
    jet_log,
    jet_pow,
    jet_sech,
    jet_sin,
    jet_sinh,
    jet_sqrt,
    jet_tan,
    jet_tanh,
)

FUNCTIONS = {
    "sin": jet_sin,
    "cos": jet_cos,
    "tan": jet_tan,
    "sinh": jet_sinh,
    "cosh": jet_cosh,
    "tanh": jet_tanh,
    "sech": jet_sech,
    "csch": jet_csch,
    "coth": jet_coth,
    "asin": jet_asin,
    "acos": jet_acos,
    "atan": jet_atan,
    "asinh": jet_asinh,
    "exp": jet_exp,
    "log": jet_log,
    "sqrt": jet_sqrt,
    "abs": jet_abs,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprError(ValueError):
    """Parse or evaluation diagnostic with a byte offset and caret excerpt."""

    def __init__(self, message, source, offset):
        self.message = message
        self.source = source
        self.offset = offset
        caret = " " * offset + "^"
        super().__init__(f"{message} at offset {offset}\n  {source}\n  {caret}")


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    offset: int = field(compare=False, repr=False, default=0, kw_only=True)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str  # pi | e


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


# -- lexer -------------------------------------------------------------------

_OPS = set("+-*/^(),")


def _tokens(source):
    i, n = 0, len(source)
    out = []
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            out.append((c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ExprError(f"malformed number {text!r}", source, i) from None
            out.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            out.append(("ident", source[i:j], i))
            i = j
            continue
        raise ExprError(f"unexpected character {c!r}", source, i)
    out.append(("end", "", n))
    return out


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source, names):
        self.source = source
        self.names = set(names)
        self.toks = _tokens(source)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, message, offset=None):
        raise ExprError(message, self.source, self.peek()[2] if offset is None else offset)

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            self.fail(f"expected {kind!r}, found {t[1]!r}" if t[0] != "end"
                      else f"expected {kind!r}, found end of input", t[2])
        return t

    def parse(self):
        e = self.sum()
        t = self.peek()
        if t[0] != "end":
            self.fail(f"unexpected {t[1]!r}")
        return e

    def sum(self):
        e = self.term()
        while self.peek()[0] in "+-":
            op, _, off = self.next()
            e = Bin(op, e, self.term(), offset=off)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] in "*/":
            op, _, off = self.next()
            e = Bin(op, e, self.unary(), offset=off)
        return e

    def unary(self):
        if self.peek()[0] == "-":
            _, _, off = self.next()
            return Neg(self.unary(), offset=off)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            _, _, off = self.next()
            # exponent may carry unary minus and chains right-associatively
            return Bin("^", base, self.unary(), offset=off)
        return base

    def atom(self):
        kind, value, off = self.next()
        if kind == "num":
            return Num(value, offset=off)
        if kind == "(":
            e = self.sum()
            t = self.next()
            if t[0] != ")":
                self.fail("unbalanced parenthesis: expected ')'", t[2])
            return e
        if kind == "ident":
            if self.peek()[0] == "(":
                if value not in FUNCTIONS:
                    self.fail(f"unknown function {value!r}", off)
                self.next()
                arg = self.sum()
                t = self.next()
                if t[0] == ",":
                    self.fail(f"function {value!r} takes exactly one argument", t[2])
                if t[0] != ")":
                    self.fail("unbalanced parenthesis: expected ')'", t[2])
                return Call(value, arg, offset=off)
            if value in CONSTANTS:
                return Const(value, offset=off)
            if value not in self.names:
                self.fail(f"unknown identifier {value!r}", off)
            return Var(value, offset=off)
        if kind == "end":
            self.fail("unexpected end of input", off)
        self.fail(f"unexpected {value!r}", off)


def parse(source: str, names) -> Expr:
    """Parse ``source`` against the declared ``names``."""
    return _Parser(source, names).parse()


# -- printer -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _print(e, parent_prec, right_side):
    if isinstance(e, Num):
        return repr(e.value) if e.value != int(e.value) else str(int(e.value))
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({_print(e.arg, 0, False)})"
    if isinstance(e, Neg):
        body = _print(e.arg, _PREC["neg"], False)
        text = f"-{body}"
        return f"({text})" if parent_prec > _PREC["neg"] or (parent_prec == _PREC["neg"] and right_side) else text
    if isinstance(e, Bin):
        prec = _PREC[e.op]
        if e.op == "^":
            left = _print(e.left, prec + 1, False)   # left operand binds tighter
            right = _print(e.right, prec, True)      # right-assoc
        else:
            left = _print(e.left, prec, False)
            right = _print(e.right, prec + 1, True)
        text = f"{left} {e.op} {right}"
        return f"({text})" if prec < parent_prec or (prec == parent_prec and right_side) else text
    raise TypeError(f"unknown node {e!r}")


def print_expr(e: Expr) -> str:
    """Canonical text form; ``parse(print_expr(parse(s)))`` equals ``parse(s)``."""
    return _print(e, 0, False)


def substitute(e: Expr, mapping) -> Expr:
    """Replace variables by sub-expressions (used to splice map components
    into field expressions written in chart coordinates)."""
    if isinstance(e, Var) and e.name in mapping:
        return mapping[e.name]
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping), offset=e.offset)
    if isinstance(e, Bin):
        return Bin(e.op, substitute(e.left, mapping), substitute(e.right, mapping),
                   offset=e.offset)
    if isinstance(e, Call):
        return Call(e.fn, substitute(e.arg, mapping), offset=e.offset)
    return e


def variables(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, Bin):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        return variables(e.arg)
    return set()


# -- evaluation ---------------------------------------------------------------


def eval_jet(e: Expr, bindings, arity=None) -> Jet2:
    """Evaluate over Jet2 bindings; domain failures carry the node offset."""
    if arity is None:
        if not bindings:
            raise ValueError("empty bindings: pass arity explicitly")
        arity = next(iter(bindings.values())).arity
    return _eval(e, bindings, arity)


def _eval(e, bindings, arity):
    if isinstance(e, Num):
        return Jet2.constant(e.value, arity)
    if isinstance(e, Const):
        return Jet2.constant(CONSTANTS[e.name], arity)
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise JetDomainError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, bindings, arity)
    if isinstance(e, Call):
        arg = _eval(e.arg, bindings, arity)
        try:
            return FUNCTIONS[e.fn](arg)
        except JetDomainError as exc:
            raise JetDomainError(f"{e.fn} (node at offset {e.offset}): {exc}") from None
    if isinstance(e, Bin):
        left = _eval(e.left, bindings, arity)
        if e.op == "^":
            exponent = _eval(e.right, bindings, arity)
            if not exponent.grad.any() and not exponent.hess.any():
                return left ** exponent.value   # constant exponent: exact rules
            return jet_pow(left, exponent)
        right = _eval(e.right, bindings, arity)
        try:
            if e.op == "+":
                return left + right
            if e.op == "-":
                return left - right
            if e.op == "*":
                return left * right
            if e.op == "/":
                return left / right
        except JetDomainError as exc:
            raise JetDomainError(f"{e.op!r} (node at offset {e.offset}): {exc}") from None
    raise TypeError(f"unknown node {e!r}")


def compile_field(e: Expr, names, constants=None, name="") -> ScalarField:
    """Compile an expression to a ScalarField over the ordered ``names``.

    ``constants`` are bound as zero-derivative jets.
    """
    names = list(names)
    constants = dict(constants or {})
    free = variables(e) - set(names) - set(constants)
    if free:
        raise ValueError(f"expression has unbound variables {sorted(free)}")
    arity = len(names)

    def ev(p):
        bindings = {nm: Jet2.variable(p[i], i, arity) for i, nm in enumerate(names)}
        for nm, val in constants.items():
            bindings[nm] = Jet2.constant(val, arity)
        return eval_jet(e, bindings, arity=arity)

    return ScalarField(arity, ev, name or print_expr(e))
