"""Scalar-field algebra over a small independent-variable set.

Every coefficient entering the frame computations (metric values, bracket
coefficients, warping and parameter functions, twists) is a ``ScalarField``:
a real-valued function of at most three named variables that can produce
the field of any first partial derivative *exactly*.  Derivative fields are
built structurally (sum/product/chain/quotient rules), so repeated frame
differentiation -- connection coefficients, curvature tensors, Ricci forms
and their exterior derivatives -- stays free of finite-difference noise.
Finite differences appear only in the test suite, as an independent oracle.

Evaluation is pointwise and cached per field, so shared subexpressions (the
pointwise connection solves in particular) are computed once per grid point.
Fields are immutable after construction; the caches are write-once per point
and safe to share between threads.
"""

from __future__ import annotations

import math
import re as _re
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "KSet",
    "ScalarField",
    "CScalarField",
    "FieldError",
    "DomainError",
    "ExpressionError",
    "SingularMatrixError",
    "LinearFieldSystem",
    "constant",
    "variable",
    "make_closed_form",
    "lift_partial",
    "exp",
    "log",
    "log_abs",
    "sin",
    "cos",
    "tan",
    "sinh",
    "cosh",
    "tanh",
    "sech",
    "sqrt",
    "remap",
    "guarded",
    "determinant",
    "solve_linear",
]

_MISSING = object()


class FieldError(Exception):
    """Base error for scalar-field construction and evaluation."""


class DomainError(FieldError):
    """Evaluation was requested outside a field's domain (log of a
    nonpositive value, fractional power of a negative base, a guarded
    region, a degenerate denominator)."""


class SingularMatrixError(FieldError):
    """A pointwise linear solve met a (near-)singular matrix."""


class ExpressionError(FieldError):
    """A closed-form expression failed to parse."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class KSet:
    """Ordered set of independent-variable names; at most three variables."""

    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) > 3:
            raise ValueError("a k-set holds at most 3 variables, got %d" % len(names))
        if len(set(names)) != len(names):
            raise ValueError("k-set variable names must be distinct: %r" % (names,))
        for nm in names:
            if not isinstance(nm, str) or not nm:
                raise ValueError("k-set variable names must be nonempty strings")

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError("unknown variable name %r (k-set has %r)" % (name, self.names)) from None


class ScalarField:
    """Function of the k-set variables with exact partials of every order.

    Subclasses implement ``_eval`` (value at a point tuple) and ``_derive``
    (construct the field of the i-th first partial).  ``partial`` memoizes
    the derivative fields, ``at`` memoizes point values.
    """

    __slots__ = ("kset", "_partials", "_cache")

    def __init__(self, kset: KSet):
        self.kset = kset
        self._partials = {}
        self._cache = {}

    # evaluation ----------------------------------------------------------

    def at(self, point) -> float:
        if type(point) is not tuple:
            point = tuple(point)
        got = self._cache.get(point, _MISSING)
        if got is _MISSING:
            got = self._eval(point)
            self._cache[point] = got
        return got

    def _eval(self, point):  # pragma: no cover - abstract
        raise NotImplementedError

    # derivatives ---------------------------------------------------------

    def partial(self, i: int) -> "ScalarField":
        if not 0 <= i < max(self.kset.size, 1):
            raise IndexError("partial index %d out of range for k-set %r" % (i, self.kset.names))
        got = self._partials.get(i)
        if got is None:
            got = self._derive(i)
            self._partials[i] = got
        return got

    def _derive(self, i):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    # operator sugar -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, complex) and not isinstance(other, (int, float)):
            return CScalarField(self) + other
        o = _coerce(other, self.kset)
        return NotImplemented if o is None else _add(self, o)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, complex) and not isinstance(other, (int, float)):
            return CScalarField(self) - other
        o = _coerce(other, self.kset)
        return NotImplemented if o is None else _sub(self, o)

    def __rsub__(self, other):
        o = _coerce(other, self.kset)
        return NotImplemented if o is None else _sub(o, self)

    def __mul__(self, other):
        if isinstance(other, complex) and not isinstance(other, (int, float)):
            return CScalarField(_mul(self, constant(self.kset, other.real)),
                                _mul(self, constant(self.kset, other.imag)))
        o = _coerce(other, self.kset)
        return NotImplemented if o is None else _mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other, self.kset)
        return NotImplemented if o is None else _div(self, o)

    def __rtruediv__(self, other):
        o = _coerce(other, self.kset)
        return NotImplemented if o is None else _div(o, self)

    def __neg__(self):
        return _mul(constant(self.kset, -1.0), self)

    def __pow__(self, p):
        if isinstance(p, (int, float)):
            return _pow(self, float(p))
        o = _coerce(p, self.kset)
        if o is None:
            return NotImplemented
        if o.is_constant:
            return _pow(self, o.at(_origin(self.kset)))
        return exp(o * log(self))


def _origin(kset: KSet):
    return (0.0,) * kset.size


def _coerce(x, kset: KSet):
    if isinstance(x, ScalarField):
        if x.kset.names != kset.names:
            raise FieldError("fields over different k-sets: %r vs %r" % (x.kset.names, kset.names))
        return x
    if isinstance(x, (int, float)):
        return Const(kset, float(x))
    return None


# concrete nodes ------------------------------------------------------------


class Const(ScalarField):
    __slots__ = ("c",)

    def __init__(self, kset, c):
        super().__init__(kset)
        self.c = float(c)

    def at(self, point):
        return self.c

    def _eval(self, point):
        return self.c

    def _derive(self, i):
        return Const(self.kset, 0.0)

    @property
    def is_constant(self):
        return True

    def __repr__(self):
        return "Const(%r)" % self.c


class Var(ScalarField):
    __slots__ = ("i",)

    def __init__(self, kset, i):
        super().__init__(kset)
        self.i = i

    def at(self, point):
        return point[self.i]

    def _eval(self, point):
        return point[self.i]

    def _derive(self, j):
        return Const(self.kset, 1.0 if j == self.i else 0.0)

    def __repr__(self):
        return "Var(%r)" % (self.kset.names[self.i],)


class _Add(ScalarField):
    __slots__ = ("f", "g")

    def __init__(self, f, g):
        super().__init__(f.kset)
        self.f, self.g = f, g

    def _eval(self, p):
        return self.f.at(p) + self.g.at(p)

    def _derive(self, i):
        return _add(self.f.partial(i), self.g.partial(i))


class _Sub(ScalarField):
    __slots__ = ("f", "g")

    def __init__(self, f, g):
        super().__init__(f.kset)
        self.f, self.g = f, g

    def _eval(self, p):
        return self.f.at(p) - self.g.at(p)

    def _derive(self, i):
        return _sub(self.f.partial(i), self.g.partial(i))


class _Mul(ScalarField):
    __slots__ = ("f", "g")

    def __init__(self, f, g):
        super().__init__(f.kset)
        self.f, self.g = f, g

    def _eval(self, p):
        return self.f.at(p) * self.g.at(p)

    def _derive(self, i):
        return _add(_mul(self.f.partial(i), self.g), _mul(self.f, self.g.partial(i)))


class _Div(ScalarField):
    __slots__ = ("f", "g", "eps", "label")

    def __init__(self, f, g, eps=0.0, label=""):
        super().__init__(f.kset)
        self.f, self.g = f, g
        self.eps = eps
        self.label = label

    def _eval(self, p):
        den = self.g.at(p)
        if den == 0.0 or abs(den) <= self.eps:
            what = self.label or "quotient"
            raise DomainError("%s has degenerate denominator %r at %r" % (what, den, p))
        return self.f.at(p) / den

    def _derive(self, i):
        num = _sub(_mul(self.f.partial(i), self.g), _mul(self.f, self.g.partial(i)))
        return _Div(num, _mul(self.g, self.g), self.eps, self.label)


class _PowC(ScalarField):
    """f ** p for a numeric exponent p."""

    __slots__ = ("f", "p")

    def __init__(self, f, p):
        super().__init__(f.kset)
        self.f, self.p = f, float(p)

    def _eval(self, point):
        base = self.f.at(point)
        return _safe_pow(base, self.p, point)

    def _derive(self, i):
        return _mul(Const(self.kset, self.p), _mul(_pow(self.f, self.p - 1.0), self.f.partial(i)))


def _safe_pow(base, p, point):
    if base == 0.0 and p < 0.0:
        raise DomainError("zero base raised to negative power %r at %r" % (p, point))
    if base < 0.0 and p != int(p):
        raise DomainError("negative base %r raised to fractional power %r at %r" % (base, p, point))
    try:
        return math.pow(base, p)
    except (ValueError, OverflowError) as exc:
        raise DomainError("power %r**%r failed at %r: %s" % (base, p, point, exc)) from None


class _Exp(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.exp(self.f.at(p))

    def _derive(self, i):
        return _mul(self, self.f.partial(i))


class _Log(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        x = self.f.at(p)
        if x <= 0.0:
            raise DomainError("log of nonpositive value %r at %r" % (x, p))
        return math.log(x)

    def _derive(self, i):
        return _div(self.f.partial(i), self.f)


class _LogAbs(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        x = self.f.at(p)
        if x == 0.0:
            raise DomainError("log|.| of zero at %r" % (p,))
        return math.log(abs(x))

    def _derive(self, i):
        return _div(self.f.partial(i), self.f)


class _Sin(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.sin(self.f.at(p))

    def _derive(self, i):
        return _mul(_Cos(self.f), self.f.partial(i))


class _Cos(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.cos(self.f.at(p))

    def _derive(self, i):
        return _mul(Const(self.kset, -1.0), _mul(_Sin(self.f), self.f.partial(i)))


class _Tan(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.tan(self.f.at(p))

    def _derive(self, i):
        c = _Cos(self.f)
        return _div(self.f.partial(i), _mul(c, c))


class _Sinh(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.sinh(self.f.at(p))

    def _derive(self, i):
        return _mul(_Cosh(self.f), self.f.partial(i))


class _Cosh(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.cosh(self.f.at(p))

    def _derive(self, i):
        return _mul(_Sinh(self.f), self.f.partial(i))


class _Tanh(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        return math.tanh(self.f.at(p))

    def _derive(self, i):
        c = _Cosh(self.f)
        return _div(self.f.partial(i), _mul(c, c))


class _Sqrt(ScalarField):
    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.kset)
        self.f = f

    def _eval(self, p):
        x = self.f.at(p)
        if x < 0.0:
            raise DomainError("sqrt of negative value %r at %r" % (x, p))
        return math.sqrt(x)

    def _derive(self, i):
        return _div(self.f.partial(i), _mul(Const(self.kset, 2.0), self))


class _Remap(ScalarField):
    """A field of a smaller k-set viewed over a larger one.

    ``mapping[i]`` is the index in the new k-set of the inner field's i-th
    variable.  The mapping must be injective.
    """

    __slots__ = ("f", "mapping")

    def __init__(self, f, kset, mapping):
        super().__init__(kset)
        self.f = f
        self.mapping = tuple(mapping)

    def _eval(self, p):
        return self.f.at(tuple(p[m] for m in self.mapping))

    def _derive(self, j):
        for i, m in enumerate(self.mapping):
            if m == j:
                inner = self.f.partial(i)
                if inner is self.f:
                    return self
                return _Remap(inner, self.kset, self.mapping)
        return Const(self.kset, 0.0)


class _Guarded(ScalarField):
    """Field with an explicit domain predicate on evaluation points."""

    __slots__ = ("f", "pred", "description")

    def __init__(self, f, pred, description):
        super().__init__(f.kset)
        self.f = f
        self.pred = pred
        self.description = description

    def _eval(self, p):
        if not self.pred(p):
            raise DomainError("point %r violates domain guard: %s" % (p, self.description))
        return self.f.at(p)

    def _derive(self, i):
        return _Guarded(self.f.partial(i), self.pred, self.description)


# smart constructors ---------------------------------------------------------


def _add(f, g):
    if f.is_constant and g.is_constant:
        return Const(f.kset, f.c + g.c)
    if f.is_constant and f.c == 0.0:
        return g
    if g.is_constant and g.c == 0.0:
        return f
    return _Add(f, g)


def _sub(f, g):
    if f.is_constant and g.is_constant:
        return Const(f.kset, f.c - g.c)
    if g.is_constant and g.c == 0.0:
        return f
    if f.is_constant and f.c == 0.0:
        return _mul(Const(f.kset, -1.0), g)
    return _Sub(f, g)


def _mul(f, g):
    if f.is_constant and g.is_constant:
        return Const(f.kset, f.c * g.c)
    if g.is_constant:
        f, g = g, f  # keep constants on the left
    if f.is_constant:
        if f.c == 0.0:
            return Const(f.kset, 0.0)
        if f.c == 1.0:
            return g
        if isinstance(g, _Mul) and g.f.is_constant:
            return _Mul(Const(f.kset, f.c * g.f.c), g.g)
    return _Mul(f, g)


def _split_const_factor(f):
    if isinstance(f, _Mul) and f.f.is_constant:
        return f.f.c, f.g
    return 1.0, f


def _div(f, g, eps=0.0, label=""):
    if g.is_constant:
        if g.c == 0.0:
            raise DomainError("division by the zero field")
        return _mul(Const(f.kset, 1.0 / g.c), f)
    if f.is_constant and f.c == 0.0:
        return f
    fc, f_inner = _split_const_factor(f)
    gc, g_inner = _split_const_factor(g)
    if f_inner is g_inner:
        # exact quotient of a shared node (up to constant factors); keeps
        # ratios like w'/w for w = e^tau evaluable far beyond the overflow
        # range of w itself
        return Const(f.kset, fc / gc)
    return _Div(f, g, eps, label)


def _pow(f, p):
    p = float(p)
    if p == 0.0:
        return Const(f.kset, 1.0)
    if p == 1.0:
        return f
    if f.is_constant:
        return Const(f.kset, _safe_pow(f.c, p, ()))
    return _PowC(f, p)


def constant(kset: KSet, c: float) -> ScalarField:
    return Const(kset, c)


def variable(kset: KSet, name: str) -> ScalarField:
    return Var(kset, kset.index(name))


def exp(f: ScalarField) -> ScalarField:
    if f.is_constant:
        return Const(f.kset, math.exp(f.c))
    return _Exp(f)


def log(f: ScalarField) -> ScalarField:
    return _Log(f)


def log_abs(f: ScalarField) -> ScalarField:
    return _LogAbs(f)


def sin(f: ScalarField) -> ScalarField:
    return Const(f.kset, math.sin(f.c)) if f.is_constant else _Sin(f)


def cos(f: ScalarField) -> ScalarField:
    return Const(f.kset, math.cos(f.c)) if f.is_constant else _Cos(f)


def tan(f: ScalarField) -> ScalarField:
    return Const(f.kset, math.tan(f.c)) if f.is_constant else _Tan(f)


def sinh(f: ScalarField) -> ScalarField:
    return Const(f.kset, math.sinh(f.c)) if f.is_constant else _Sinh(f)


def cosh(f: ScalarField) -> ScalarField:
    return Const(f.kset, math.cosh(f.c)) if f.is_constant else _Cosh(f)


def tanh(f: ScalarField) -> ScalarField:
    return Const(f.kset, math.tanh(f.c)) if f.is_constant else _Tanh(f)


def sech(f: ScalarField) -> ScalarField:
    return _div(Const(f.kset, 1.0), cosh(f))


def sqrt(f: ScalarField) -> ScalarField:
    return _Sqrt(f)


def guarded(f: ScalarField, pred: Callable, description: str) -> ScalarField:
    return _Guarded(f, pred, description)


def remap(f: ScalarField, kset: KSet, rename=None) -> ScalarField:
    """View a field of a smaller k-set as a field over ``kset``.

    ``rename`` optionally maps the field's variable names onto names of the
    target k-set; by default names are matched verbatim.
    """
    if f.kset.names == kset.names:
        return f
    if f.is_constant:
        return Const(kset, f.c)
    rename = rename or {}
    mapping = tuple(kset.index(rename.get(nm, nm)) for nm in f.kset.names)
    if len(set(mapping)) != len(mapping):
        raise FieldError("remap must be injective: %r" % (mapping,))
    return _Remap(f, kset, mapping)


def lift_partial(f: ScalarField, i) -> ScalarField:
    """Return the field of the i-th first partial (index or variable name)."""
    if isinstance(i, str):
        i = f.kset.index(i)
    return f.partial(i)


# pointwise linear solves ----------------------------------------------------


class LinearFieldSystem:
    """Shared n-by-n pointwise solve A(point) x = b(point).

    Solution components are fields; their partials are obtained from the
    identity dx = A^{-1} (db - dA x), so derivatives of any order propagate
    exactly through the solve.
    """

    __slots__ = ("A", "b", "kset", "n", "min_abs_det", "_cache", "_dsys", "_components")

    def __init__(self, A, b, min_abs_det=1e-10):
        self.A = [list(row) for row in A]
        self.b = list(b)
        self.n = len(self.b)
        self.kset = self.b[0].kset
        self.min_abs_det = min_abs_det
        self._cache = {}
        self._dsys = {}
        self._components = None

    def value_at(self, point):
        got = self._cache.get(point, _MISSING)
        if got is _MISSING:
            M = np.array([[f.at(point) for f in row] for row in self.A])
            v = np.array([f.at(point) for f in self.b])
            det = np.linalg.det(M)
            if abs(det) <= self.min_abs_det:
                raise SingularMatrixError(
                    "near-singular matrix (|det| = %.3e) in pointwise solve at %r" % (abs(det), point)
                )
            got = np.linalg.solve(M, v)
            self._cache[point] = got
        return got

    def components(self):
        if self._components is None:
            self._components = [_SolveComponent(self, j) for j in range(self.n)]
        return self._components

    def derivative_system(self, i):
        sys_i = self._dsys.get(i)
        if sys_i is None:
            x = self.components()
            rhs = []
            for c in range(self.n):
                term = self.b[c].partial(i)
                for d in range(self.n):
                    term = _sub(term, _mul(self.A[c][d].partial(i), x[d]))
                rhs.append(term)
            sys_i = LinearFieldSystem(self.A, rhs, self.min_abs_det)
            self._dsys[i] = sys_i
        return sys_i


class _SolveComponent(ScalarField):
    __slots__ = ("sys", "j")

    def __init__(self, sys, j):
        super().__init__(sys.kset)
        self.sys = sys
        self.j = j

    def _eval(self, p):
        return float(self.sys.value_at(p)[self.j])

    def _derive(self, i):
        return self.sys.derivative_system(i).components()[self.j]


def solve_linear(A, b, min_abs_det=1e-10):
    """Solve A x = b pointwise; returns the solution component fields."""
    return LinearFieldSystem(A, b, min_abs_det).components()


def _perm_sign(perm):
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def determinant(m) -> ScalarField:
    """Determinant of a small matrix of fields, by the Leibniz expansion."""
    import itertools

    n = len(m)
    kset = m[0][0].kset
    total = Const(kset, 0.0)
    for perm in itertools.permutations(range(n)):
        term = Const(kset, float(_perm_sign(perm)))
        for i in range(n):
            term = _mul(term, m[i][perm[i]])
        total = _add(total, term)
    return total


# complex-valued fields ------------------------------------------------------


class CScalarField:
    """Complex-valued field as an (re, im) pair of scalar fields."""

    __slots__ = ("re", "im")

    def __init__(self, re_part: ScalarField, im_part: ScalarField | None = None):
        if im_part is None:
            im_part = Const(re_part.kset, 0.0)
        if re_part.kset.names != im_part.kset.names:
            raise FieldError("real and imaginary parts live over different k-sets")
        self.re = re_part
        self.im = im_part

    @property
    def kset(self):
        return self.re.kset

    def at(self, point) -> complex:
        return complex(self.re.at(point), self.im.at(point))

    def partial(self, i) -> "CScalarField":
        return CScalarField(self.re.partial(i), self.im.partial(i))

    def conj(self) -> "CScalarField":
        return CScalarField(self.re, -self.im)

    @property
    def is_constant(self):
        return self.re.is_constant and self.im.is_constant

    def _coerce(self, other):
        if isinstance(other, CScalarField):
            return other
        if isinstance(other, ScalarField):
            return CScalarField(other)
        if isinstance(other, (int, float)):
            return CScalarField(Const(self.kset, float(other)))
        if isinstance(other, complex):
            return CScalarField(Const(self.kset, other.real), Const(self.kset, other.imag))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CScalarField(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CScalarField(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CScalarField(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        num = self * o.conj()
        return CScalarField(_div(num.re, den), _div(num.im, den))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return CScalarField(-self.re, -self.im)


# closed-form expression parser ---------------------------------------------

_FUNCTIONS = {
    "exp": exp,
    "log": log,
    "logabs": log_abs,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "sech": sech,
    "sqrt": sqrt,
}

_NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

_NUM_RE = _re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_IDENT_RE = _re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    """Recursive-descent parser for the closed-form expression grammar.

    Grammar: identifiers, numeric literals, ``+ - * / ^``, parentheses and
    one-argument function calls.  ``^`` binds tighter than unary minus and
    is right-associative.
    """

    def __init__(self, text: str, kset: KSet):
        self.text = text
        self.kset = kset
        self.pos = 0

    def parse(self) -> ScalarField:
        node = self._expression()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ExpressionError("unexpected trailing input %r" % self.text[self.pos:], self.pos)
        return node

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self):
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expression(self):
        node = self._term()
        while True:
            ch = self._peek()
            if ch == "+":
                self.pos += 1
                node = _add(node, self._term())
            elif ch == "-":
                self.pos += 1
                node = _sub(node, self._term())
            else:
                return node

    def _term(self):
        node = self._unary()
        while True:
            ch = self._peek()
            if ch == "*":
                self.pos += 1
                node = _mul(node, self._unary())
            elif ch == "/":
                self.pos += 1
                node = _div(node, self._unary())
            else:
                return node

    def _unary(self):
        if self._peek() == "-":
            self.pos += 1
            return _mul(Const(self.kset, -1.0), self._unary())
        return self._power()

    def _power(self):
        base = self._atom()
        if self._peek() == "^":
            self.pos += 1
            expo = self._unary()
            if expo.is_constant:
                return _pow(base, expo.c)
            return exp(_mul(expo, log(base)))
        return base

    def _atom(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            raise ExpressionError("unexpected end of expression", self.pos)
        ch = self.text[self.pos]
        if ch == "(":
            self.pos += 1
            node = self._expression()
            if self._peek() != ")":
                raise ExpressionError("expected ')'", self.pos)
            self.pos += 1
            return node
        m = _NUM_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Const(self.kset, float(m.group()))
        m = _IDENT_RE.match(self.text, self.pos)
        if m:
            name = m.group()
            self.pos = m.end()
            if self._peek() == "(":
                fn = _FUNCTIONS.get(name)
                if fn is None:
                    raise ExpressionError("unknown function %r" % name, m.start())
                self.pos += 1
                arg = self._expression()
                if self._peek() == ",":
                    raise ExpressionError("function %r takes a single argument" % name, self.pos)
                if self._peek() != ")":
                    raise ExpressionError("expected ')' after argument of %r" % name, self.pos)
                self.pos += 1
                return fn(arg)
            if name in _NAMED_CONSTANTS:
                return Const(self.kset, _NAMED_CONSTANTS[name])
            if name in self.kset.names:
                return Var(self.kset, self.kset.index(name))
            raise ExpressionError(
                "unknown variable name %r (k-set has %r)" % (name, self.kset.names), m.start()
            )
        raise ExpressionError("unexpected character %r" % ch, self.pos)


def make_closed_form(expr: str, kset: KSet) -> ScalarField:
    """Parse an elementary closed-form expression into a field."""
    return _Parser(expr, kset).parse()
