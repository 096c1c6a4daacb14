"""Scalar differentiation kernel.

Second-order jets (``Jet2``) carry a value together with exact first and
second partial derivatives and propagate them through arithmetic and the
elementary functions.  They back every metric, immersion and field
expression in the engine.  ``Jet1`` is the cheap first-order variant used
to differentiate *derived* per-point quantities (normals, frames, fitted
potentials) with respect to surface parameters.  A central finite
difference oracle cross-checks both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class JetDomainError(ValueError):
    """Evaluation left the domain of an elementary function."""

    def __init__(self, message, point=None):
        self.point = None if point is None else tuple(float(c) for c in point)
        if self.point is not None:
            message = f"{message} at point {self.point}"
        super().__init__(message)


class Jet2:
    """Truncated Taylor value: f, grad f, Hess f at a point, ``arity`` variables.

    The Hessian is kept exactly symmetric; arithmetic satisfies the product
    and chain rules exactly (up to floating round-off).
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        h = np.asarray(hess, dtype=float)
        self.hess = 0.5 * (h + h.T)  # enforce exact symmetry

    @property
    def arity(self):
        return self.grad.shape[0]

    @staticmethod
    def constant(value, arity):
        return Jet2(value, np.zeros(arity), np.zeros((arity, arity)))

    @staticmethod
    def variable(value, index, arity):
        g = np.zeros(arity)
        g[index] = 1.0
        return Jet2(value, g, np.zeros((arity, arity)))

    # -- ring operations ---------------------------------------------------

    def _lift(self, other):
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(float(other), self.arity)

    def __add__(self, other):
        o = self._lift(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Jet2(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        o = self._lift(other)
        cross = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + cross + cross.T,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.value == 0.0:
            raise JetDomainError("division by zero")
        return self * o._compose(1.0 / o.value, -1.0 / o.value**2, 2.0 / o.value**3)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, Jet2):
            raise TypeError("use jet_pow for jet exponents")
        n = float(exponent)
        if n == int(n):
            return self._int_pow(int(n))
        if self.value <= 0.0:
            raise JetDomainError(
                f"non-integer power of non-positive base {self.value!r}"
            )
        v = self.value
        return self._compose(v**n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2))

    def _int_pow(self, n):
        if n == 0:
            return Jet2.constant(1.0, self.arity)
        if n < 0:
            if self.value == 0.0:
                raise JetDomainError("negative power of zero")
            return 1.0 / self._int_pow(-n)
        v = self.value
        return self._compose(v**n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2))

    def _compose(self, f0, f1, f2):
        """Chain rule through a univariate map with derivatives f1, f2 at value."""
        return Jet2(
            f0,
            f1 * self.grad,
            f1 * self.hess + f2 * np.outer(self.grad, self.grad),
        )

    def __repr__(self):
        return f"Jet2({self.value!r}, grad={self.grad!r})"


def _j2(name, f0, f1, f2, guard=None):
    """Build an elementary Jet2 function from value/derivative maps."""

    def fn(x: Jet2) -> Jet2:
        if guard is not None:
            guard(x.value)
        v = x.value
        return x._compose(f0(v), f1(v), f2(v))

    fn.__name__ = name
    return fn


def _guard_log(v):
    if v <= 0.0:
        raise JetDomainError(f"log of non-positive value {v!r}")


def _guard_sqrt(v):
    if v <= 0.0:
        raise JetDomainError(f"sqrt of non-positive value {v!r} (jet undefined at 0)")


def _guard_asin(v):
    if abs(v) >= 1.0:
        raise JetDomainError(f"inverse sine/cosine argument {v!r} outside (-1, 1)")


def _guard_pole(v):
    if abs(v) < 1e-300:
        raise JetDomainError("pole of csch/coth at 0")


def _guard_abs(v):
    if v == 0.0:
        raise JetDomainError("abs is not differentiable at 0")


jet_sin = _j2("sin", math.sin, math.cos, lambda v: -math.sin(v))
jet_cos = _j2("cos", math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v))
jet_tan = _j2(
    "tan",
    math.tan,
    lambda v: 1.0 + math.tan(v) ** 2,
    lambda v: 2.0 * math.tan(v) * (1.0 + math.tan(v) ** 2),
)
jet_sinh = _j2("sinh", math.sinh, math.cosh, math.sinh)
jet_cosh = _j2("cosh", math.cosh, math.sinh, math.cosh)
jet_tanh = _j2(
    "tanh",
    math.tanh,
    lambda v: 1.0 - math.tanh(v) ** 2,
    lambda v: -2.0 * math.tanh(v) * (1.0 - math.tanh(v) ** 2),
)
# sech/csch/coth via their exponential forms, with pole guards
jet_sech = _j2(
    "sech",
    lambda v: 1.0 / math.cosh(v),
    lambda v: -math.tanh(v) / math.cosh(v),
    lambda v: (math.tanh(v) ** 2 - 1.0 / math.cosh(v) ** 2) / math.cosh(v),
)
jet_csch = _j2(
    "csch",
    lambda v: 1.0 / math.sinh(v),
    lambda v: -(1.0 / math.tanh(v)) / math.sinh(v),
    lambda v: ((1.0 / math.tanh(v)) ** 2 + (1.0 / math.sinh(v)) ** 2)
    / math.sinh(v),
    guard=_guard_pole,
)
jet_coth = _j2(
    "coth",
    lambda v: 1.0 / math.tanh(v),
    lambda v: -1.0 / math.sinh(v) ** 2,
    lambda v: 2.0 / (math.tanh(v) * math.sinh(v) ** 2),
    guard=_guard_pole,
)
jet_asin = _j2(
    "asin",
    math.asin,
    lambda v: 1.0 / math.sqrt(1.0 - v * v),
    lambda v: v / (1.0 - v * v) ** 1.5,
    guard=_guard_asin,
)
jet_acos = _j2(
    "acos",
    math.acos,
    lambda v: -1.0 / math.sqrt(1.0 - v * v),
    lambda v: -v / (1.0 - v * v) ** 1.5,
    guard=_guard_asin,
)
jet_atan = _j2(
    "atan",
    math.atan,
    lambda v: 1.0 / (1.0 + v * v),
    lambda v: -2.0 * v / (1.0 + v * v) ** 2,
)
jet_asinh = _j2(
    "asinh",
    math.asinh,
    lambda v: 1.0 / math.sqrt(1.0 + v * v),
    lambda v: -v / (1.0 + v * v) ** 1.5,
)
jet_exp = _j2("exp", math.exp, math.exp, math.exp)
jet_log = _j2("log", math.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2, guard=_guard_log)
jet_sqrt = _j2(
    "sqrt",
    math.sqrt,
    lambda v: 0.5 / math.sqrt(v),
    lambda v: -0.25 / v**1.5,
    guard=_guard_sqrt,
)
jet_abs = _j2(
    "abs",
    abs,
    lambda v: math.copysign(1.0, v),
    lambda v: 0.0,
    guard=_guard_abs,
)


def jet_pow(base: Jet2, exponent: Jet2) -> Jet2:
    """General power with a jet exponent, restricted to positive bases."""
    if base.value <= 0.0:
        raise JetDomainError(f"power with non-positive base {base.value!r}")
    return jet_exp(exponent * jet_log(base))


@dataclass(frozen=True)
class ScalarField:
    """A pure multivariate scalar map evaluated to a second-order jet."""

    arity: int
    fn: Callable[[np.ndarray], Jet2] = field(repr=False)
    name: str = ""

    def eval(self, point) -> Jet2:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.arity,):
            raise ValueError(
                f"point of arity {p.shape} passed to field of arity {self.arity}"
            )
        return self.fn(p)

    @staticmethod
    def constant(value, arity, name=""):
        return ScalarField(
            arity, lambda p, v=float(value): Jet2.constant(v, arity), name or str(value)
        )

    @staticmethod
    def coordinate(index, arity, name=""):
        return ScalarField(
            arity,
            lambda p: Jet2.variable(p[index], index, arity),
            name or f"x{index}",
        )

    @staticmethod
    def from_callable(arity, fn, name=""):
        """Wrap a function of Jet2 coordinates (field built in jet arithmetic)."""

        def ev(p):
            coords = [Jet2.variable(p[i], i, arity) for i in range(arity)]
            return fn(*coords)

        return ScalarField(arity, ev, name)


def jet_eval(fld: ScalarField, point) -> Jet2:
    """Value, gradient and Hessian of ``fld`` at ``point``."""
    try:
        return fld.eval(point)
    except JetDomainError as exc:
        if exc.point is None:
            raise JetDomainError(str(exc), point=point) from None
        raise


# -- finite-difference oracle ----------------------------------------------


@dataclass
class FDEstimate:
    """Central-difference derivative estimate, truncation order O(step^2)."""

    order: int
    step: float
    data: np.ndarray  # gradient (n,) or Hessian (n, n)
    roundoff_warning: bool


def _fd_gradient(f, p, h):
    n = p.shape[0]
    g = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (f(p + e) - f(p - e)) / (2.0 * h)
    return g


def _fd_hessian(f, p, h):
    n = p.shape[0]
    H = np.zeros((n, n))
    f0 = f(p)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (f(p + ei) - 2.0 * f0 + f(p - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (
                f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)
            ) / (4.0 * h**2)
    return H


def fd_oracle(fld: ScalarField, point, order: int, step: float = 1e-4,
              richardson: bool = True) -> FDEstimate:
    """Finite-difference gradient (order 1) or Hessian (order 2) of ``fld``.

    Uses central differences of plain values only, so it is independent of
    the jet propagation it is used to check.  One Richardson extrapolation
    level is applied by default.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    p = np.asarray(point, dtype=float)

    def f(q):
        return fld.eval(q).value

    est = _fd_gradient if order == 1 else _fd_hessian
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    coarse = est(f, p, step)
    if richardson:
        fine = est(f, p, step / 2.0)
        data = (4.0 * fine - coarse) / 3.0
    else:
        data = coarse
    warn_at = np.finfo(float).eps ** (1.0 / (2 + order)) / 10.0
    return FDEstimate(order, step, data, roundoff_warning=step < warn_at)


# -- first-order jets for derived quantities --------------------------------


class Jet1:
    """First-order jet (value + gradient over a fixed seed count).

    Used to push exact first derivatives of *derived* geometric scalars
    (normal components, angle, frame coefficients) through the per-point
    pipeline.  Gradients are plain tuples; profiling showed tuples beat
    small ndarrays by a wide margin here.
    """

    __slots__ = ("v", "d")

    def __init__(self, v, d):
        self.v = v
        self.d = d

    @staticmethod
    def constant(value, m):
        return Jet1(float(value), (0.0,) * m)

    @staticmethod
    def seed(value, index, m):
        d = [0.0] * m
        d[index] = 1.0
        return Jet1(float(value), tuple(d))

    def _as(self, other):
        if isinstance(other, Jet1):
            return other
        return Jet1(float(other), (0.0,) * len(self.d))

    def __add__(self, other):
        o = self._as(other)
        return Jet1(self.v + o.v, tuple(a + b for a, b in zip(self.d, o.d)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._as(other)
        return Jet1(self.v - o.v, tuple(a - b for a, b in zip(self.d, o.d)))

    def __rsub__(self, other):
        return self._as(other) - self

    def __neg__(self):
        return Jet1(-self.v, tuple(-a for a in self.d))

    def __mul__(self, other):
        if isinstance(other, Jet1):
            return Jet1(
                self.v * other.v,
                tuple(self.v * b + other.v * a for a, b in zip(self.d, other.d)),
            )
        c = float(other)
        return Jet1(self.v * c, tuple(c * a for a in self.d))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet1):
            if other.v == 0.0:
                raise JetDomainError("Jet1 division by zero")
            iv = 1.0 / other.v
            rv = self.v * iv
            return Jet1(rv, tuple((a - rv * b) * iv for a, b in zip(self.d, other.d)))
        c = 1.0 / float(other)
        return Jet1(self.v * c, tuple(c * a for a in self.d))

    def __rtruediv__(self, other):
        return self._as(other) / self

    def chain(self, f0, f1):
        return Jet1(f0, tuple(f1 * a for a in self.d))

    def __repr__(self):
        return f"Jet1({self.v!r}, {self.d!r})"


def d1_sqrt(x: Jet1) -> Jet1:
    if x.v <= 0.0:
        raise JetDomainError(f"sqrt of non-positive value {x.v!r}")
    r = math.sqrt(x.v)
    return x.chain(r, 0.5 / r)


def d1_acos(x: Jet1) -> Jet1:
    if abs(x.v) >= 1.0:
        raise JetDomainError(f"acos argument {x.v!r} outside (-1, 1)")
    return x.chain(math.acos(x.v), -1.0 / math.sqrt(1.0 - x.v * x.v))


def d1_asin(x: Jet1) -> Jet1:
    if abs(x.v) >= 1.0:
        raise JetDomainError(f"asin argument {x.v!r} outside (-1, 1)")
    return x.chain(math.asin(x.v), 1.0 / math.sqrt(1.0 - x.v * x.v))


def jet1_from_jet2(j: Jet2) -> Jet1:
    return Jet1(j.value, tuple(float(g) for g in j.grad))


# small generic linear algebra over Jet1 (dimensions are tiny: 2..4)


def d1_dot(metric, a, b):
    """Inner product sum_ij metric[i][j] a[i] b[j]; entries float or Jet1."""
    acc = None
    for i in range(len(a)):
        for j in range(len(b)):
            term = metric[i][j] * a[i] * b[j]
            acc = term if acc is None else acc + term
    return acc


def d1_solve(A, rhs):
    """Solve a small linear system over Jet1 by Gaussian elimination.

    Pivots are compared on value parts.  ``A`` is a list of row lists,
    ``rhs`` a list; both may mix floats and Jet1.
    """
    n = len(rhs)
    M = [list(row) for row in A]
    b = list(rhs)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(_val(M[r][col])))
        if abs(_val(M[piv][col])) < 1e-300:
            raise JetDomainError("singular system in Jet1 solve")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            b[col], b[piv] = b[piv], b[col]
        for r in range(col + 1, n):
            factor = M[r][col] / M[col][col]
            for c in range(col, n):
                M[r][c] = M[r][c] - factor * M[col][c]
            b[r] = b[r] - factor * b[col]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc = acc - M[r][c] * x[c]
        x[r] = acc / M[r][r]
    return x


def _val(x):
    return x.v if isinstance(x, Jet1) else float(x)


def d1_det(M):
    """Determinant over Jet1 by cofactor expansion (n <= 4 in practice)."""
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    acc = None
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = M[0][j] * d1_det(minor)
        if j % 2 == 1:
            term = -term
        acc = term if acc is None else acc + term
    return acc
