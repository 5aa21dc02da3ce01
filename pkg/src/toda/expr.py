"""Exact symbolic kernel.

Every scalar in the package lives in the ring

    Q[x1 .. x{2n}, t, E1 .. E{n-1}],   E_j = exp(x^j - x^{j+1}),

or in its field of fractions.  The atoms ``E_j`` are opaque: they are never
expanded, they carry integer exponents, and differentiation acts on them by
the chain rule ``dE_j/dx^j = E_j``, ``dE_j/dx^{j+1} = -E_j``.  Since the
coordinates, ``t`` and the atoms are algebraically independent functions, two
expressions are equal exactly when their normalized term maps agree.

Monomials are exponent tuples of length ``3n`` laid out as
``(x1, ..., x{2n}, t, E1, ..., E{n-1})``.  Terms are ordered graded
lexicographically with ``x1 > x2 > ... > x{2n} > t > E1 > ... > E{n-1}``;
the text serialization lists terms in decreasing order.
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import DomainError, SingularEvaluationError

Scalar = Union[int, Fraction]
Monomial = tuple

__all__ = [
    "Expr",
    "RationalExpr",
    "Ring",
    "normalize",
    "diff",
    "evaluate",
    "equals",
    "parse",
    "from_json",
    "to_json",
    "monomial_key",
]


# ---------------------------------------------------------------------------
# variables and monomials
# ---------------------------------------------------------------------------

def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"lattice size must be a positive integer, got {n!r}")


def _time_slot(n: int) -> int:
    return 2 * n


def _atom_slot(n: int, j: int) -> int:
    return 2 * n + j  # E_j sits right after t


def var_index(n: int, var) -> int:
    """Slot of a differentiable variable: ``1..2n`` (or ``"x3"``) and ``"t"``."""
    if isinstance(var, str):
        if var == "t":
            return _time_slot(n)
        m = re.fullmatch(r"x(\d+)", var)
        if m is None:
            raise DomainError(f"not a differentiable variable: {var!r}")
        var = int(m.group(1))
    if isinstance(var, (int, np.integer)) and 1 <= var <= 2 * n:
        return int(var) - 1
    raise DomainError(f"variable {var!r} outside x1..x{2 * n}, t")


def slot_name(n: int, i: int) -> str:
    if i < 2 * n:
        return f"x{i + 1}"
    if i == 2 * n:
        return "t"
    return f"E{i - 2 * n}"


def monomial_key(m: Monomial):
    return (sum(m), m)


def monomial_str(n: int, m: Monomial) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(slot_name(n, i))
        elif e:
            parts.append(f"{slot_name(n, i)}^{e}")
    return "*".join(parts) if parts else "1"


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


# ---------------------------------------------------------------------------
# polynomial expressions
# ---------------------------------------------------------------------------

class Expr:
    """Immutable polynomial in the coordinates, ``t`` and the atoms ``E_j``.

    Build instances through :class:`Ring` or :func:`normalize`; the constructor
    trusts that ``terms`` is already normalized (no zero coefficients).
    """

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Monomial, Fraction] | None = None):
        self.n = n
        self._terms = dict(terms) if terms else {}
        self._hash = None

    # -- structure ---------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: monomial_key(kv[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * (3 * self.n), Fraction(0))

    def leading_term(self) -> tuple[Monomial, Fraction]:
        if not self._terms:
            raise DomainError("zero expression has no leading term")
        m = max(self._terms, key=monomial_key)
        return m, self._terms[m]

    def depends_on(self, var) -> bool:
        i = var_index(self.n, var)
        if i == _time_slot(self.n):
            return any(m[i] for m in self._terms)
        return not self.diff(var).is_zero()

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Expr):
            if other.n != self.n:
                raise DomainError(f"cannot combine expressions with n={self.n} and n={other.n}")
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return Expr.const(self.n, other)
        return NotImplemented

    @staticmethod
    def const(n: int, c: Scalar) -> "Expr":
        c = _to_fraction(c)
        return Expr(n, {(0,) * (3 * n): c} if c else None)

    def __add__(self, other):
        if isinstance(other, RationalExpr):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Expr(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.n, {m: -c for m, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, RationalExpr):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, RationalExpr):
            return NotImplemented
        if isinstance(other, (int, Fraction, np.integer)):
            c = _to_fraction(other)
            if not c:
                return Expr(self.n)
            return Expr(self.n, {m: v * c for m, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Expr(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return RationalExpr(Expr.const(self.n, 1), self**(-k))
        result = Expr.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            c = _to_fraction(other)
            if not c:
                raise ZeroDivisionError("division of an expression by zero")
            return self * (1 / c)
        if isinstance(other, Expr):
            if other.is_constant() and not other.is_zero():
                return self / other.constant_term()
            return RationalExpr(self, other)
        if isinstance(other, RationalExpr):
            return RationalExpr(self * other.den, other.num)
        return NotImplemented

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            return self._terms == Expr.const(self.n, other)._terms
        if isinstance(other, Expr):
            return self.n == other.n and self._terms == other._terms
        if isinstance(other, RationalExpr):
            return other == self
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    # -- calculus ----------------------------------------------------------
    def diff(self, var) -> "Expr":
        n = self.n
        i = var_index(n, var)
        out: dict = {}

        def acc(m, c):
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                del out[m]

        for m, c in self._terms.items():
            if m[i]:
                mm = list(m)
                mm[i] -= 1
                acc(tuple(mm), c * m[i])
            if i < n:
                # x^j with j = i+1 enters E_j (+) and E_{j-1} (-)
                rate = 0
                j = i + 1
                if j <= n - 1:
                    rate += m[_atom_slot(n, j)]
                if j >= 2:
                    rate -= m[_atom_slot(n, j - 1)]
                if rate:
                    acc(m, c * rate)
        return Expr(n, out)

    def _rate(self, m: Monomial, i: int) -> int:
        n = self.n
        if i >= n:
            return 0
        j = i + 1
        rate = 0
        if j <= n - 1:
            rate += m[_atom_slot(n, j)]
        if j >= 2:
            rate -= m[_atom_slot(n, j - 1)]
        return rate

    def integrate(self, var) -> "Expr":
        """Term-wise antiderivative in a coordinate, with zero integration constant.

        A term ``v^p * exp(c v) * rest`` integrates to a polynomial-times-atom
        expression by repeated integration by parts, so the ring is closed
        under this operation.
        """
        n = self.n
        i = var_index(n, var)
        if i == _time_slot(n):
            raise DomainError("antiderivatives are only taken in the coordinates")
        out: dict = {}
        for m, c in self._terms.items():
            p = m[i]
            rate = self._rate(m, i)
            if rate == 0:
                mm = list(m)
                mm[i] = p + 1
                mm = tuple(mm)
                out[mm] = out.get(mm, 0) + c / (p + 1)
                continue
            falling = 1
            for k in range(p + 1):
                mm = list(m)
                mm[i] = p - k
                mm = tuple(mm)
                out[mm] = out.get(mm, 0) + c * (-1) ** k * falling / Fraction(rate) ** (k + 1)
                falling *= p - k
        return Expr(n, {m: c for m, c in out.items() if c})

    def gradient(self) -> list["Expr"]:
        return [self.diff(a) for a in range(1, 2 * self.n + 1)]

    # -- evaluation --------------------------------------------------------
    def eval(self, x, t: float | None = None) -> float:
        """Floating-point value at a phase-space point.

        ``x`` is either a sequence of ``2n`` coordinates (then ``t`` defaults
        to 0) or any object with ``x`` and ``time`` attributes.
        """
        xv, tv = _unpack_state(self.n, x, t)
        return float(_compile(self)(xv, tv))

    def lambdify(self):
        """Vectorized evaluator ``f(X, t)`` with ``X`` of shape ``(2n,)`` or ``(2n, m)``."""
        return _compile(self)

    # -- exact division ----------------------------------------------------
    def divide_exact(self, d: "Expr") -> "Expr | None":
        """Quotient ``self / d`` if ``d`` divides ``self`` in the ring, else ``None``."""
        if d.is_zero():
            raise ZeroDivisionError("division by the zero expression")
        if self.is_zero():
            return Expr(self.n)
        lm_d, lc_d = d.leading_term()
        rem = self
        q: dict = {}
        while not rem.is_zero():
            lm, lc = rem.leading_term()
            if any(a < b for a, b in zip(lm, lm_d)):
                return None
            qm = tuple(a - b for a, b in zip(lm, lm_d))
            qc = lc / lc_d
            q[qm] = q.get(qm, 0) + qc
            rem = rem - Expr(self.n, {qm: qc}) * d
        return Expr(self.n, {m: c for m, c in q.items() if c})

    # -- serialization -----------------------------------------------------
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            mono = monomial_str(self.n, m)
            a = abs(c)
            if mono == "1":
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if k == 0:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append((" - " if c < 0 else " + ") + body)
        return "".join(out)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [[str(c), monomial_str(self.n, m)] for m, c in self.sorted_terms()],
        }

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Expr(n={self.n}, {self.to_text()!r})"


# ---------------------------------------------------------------------------
# fractions
# ---------------------------------------------------------------------------

def _strip_common_monomial(num: Expr, den: Expr) -> tuple[Expr, Expr]:
    monos = list(num._terms) + list(den._terms)
    common = tuple(min(col) for col in zip(*monos))
    if not any(common):
        return num, den

    def shift(e):
        return Expr(e.n, {tuple(a - b for a, b in zip(m, common)): c for m, c in e._terms.items()})

    return shift(num), shift(den)


class RationalExpr:
    """Quotient of two :class:`Expr`; equality is decided by cross-multiplication.

    Normalization removes the largest monomial dividing both parts, divides
    out ``den`` entirely when it divides ``num`` exactly, and scales so that
    the leading coefficient of ``den`` is ``+1``.  No polynomial gcd is taken,
    so two equal fractions need not share a representation.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr | None = None):
        if den is None:
            den = Expr.const(num.n, 1)
        if num.n != den.n:
            raise DomainError(f"numerator has n={num.n}, denominator n={den.n}")
        if den.is_zero():
            raise DomainError("rational expression with zero denominator")
        if num.is_zero():
            num, den = num, Expr.const(num.n, 1)
        else:
            num, den = _strip_common_monomial(num, den)
            if len(den._terms) > 1 or not den.is_constant():
                q = num.divide_exact(den)
                if q is not None:
                    num, den = q, Expr.const(num.n, 1)
            lc = den.leading_term()[1]
            if lc != 1:
                num, den = num / lc, den / lc
        self.num = num
        self.den = den

    @property
    def n(self) -> int:
        return self.num.n

    @staticmethod
    def of(value, n: int | None = None) -> "RationalExpr":
        if isinstance(value, RationalExpr):
            return value
        if isinstance(value, Expr):
            return RationalExpr(value)
        if n is None:
            raise DomainError("lattice size needed to lift a scalar")
        return RationalExpr(Expr.const(n, value))

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def simplify(self) -> "Expr | RationalExpr":
        """The polynomial value when the denominator cancels, else ``self``."""
        if self.den.is_constant():
            return self.num / self.den.constant_term()
        return self

    def is_zero(self) -> bool:
        return self.num.is_zero()

    # -- arithmetic --------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, RationalExpr):
            if other.n != self.n:
                raise DomainError(f"cannot combine expressions with n={self.n} and n={other.n}")
            return other
        if isinstance(other, Expr):
            if other.n != self.n:
                raise DomainError(f"cannot combine expressions with n={self.n} and n={other.n}")
            return RationalExpr(other)
        if isinstance(other, (int, Fraction, np.integer)):
            return RationalExpr(Expr.const(self.n, other))
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalExpr(self.num + other.num, self.den)
        q = other.den.divide_exact(self.den)
        if q is not None:
            return RationalExpr(self.num * q + other.num, other.den)
        q = self.den.divide_exact(other.den)
        if q is not None:
            return RationalExpr(self.num + other.num * q, self.den)
        return RationalExpr(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RationalExpr(Expr(self.n))
        return RationalExpr(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by a zero rational expression")
        return RationalExpr(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return RationalExpr(self.den**(-k), self.num**(-k))
        return RationalExpr(self.num**k, self.den**k)

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        other = self._lift(other) if not isinstance(other, RationalExpr) else other
        if other is NotImplemented:
            return NotImplemented
        if other.n != self.n:
            return False
        return (self.num * other.den - other.num * self.den).is_zero()

    __hash__ = None  # equality is semantic, so no stable hash exists

    # -- calculus ----------------------------------------------------------
    def diff(self, var) -> "RationalExpr":
        dn = self.num.diff(var)
        dd = self.den.diff(var)
        if dd.is_zero():
            return RationalExpr(dn, self.den)
        return RationalExpr(dn * self.den - self.num * dd, self.den * self.den)

    def eval(self, x, t: float | None = None, tol: float = 1e-12) -> float:
        xv, tv = _unpack_state(self.n, x, t)
        d = float(_compile(self.den)(xv, tv))
        if abs(d) <= tol:
            raise SingularEvaluationError(f"denominator {self.den.to_text()} vanishes ({d:.3g})")
        return float(_compile(self.num)(xv, tv)) / d

    def lambdify(self, tol: float = 1e-12):
        fn, fd = _compile(self.num), _compile(self.den)

        def f(X, t=0.0):
            d = fd(X, t)
            if np.any(np.abs(d) <= tol):
                raise SingularEvaluationError(f"denominator {self.den.to_text()} vanishes")
            return fn(X, t) / d

        return f

    # -- serialization -----------------------------------------------------
    def to_text(self) -> str:
        if self.den == 1:
            return self.num.to_text()
        return f"({self.num.to_text()})/({self.den.to_text()})"

    def to_json(self) -> dict:
        return {"n": self.n, "num": self.num.to_json()["terms"], "den": self.den.to_json()["terms"]}

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"RationalExpr(n={self.n}, {self.to_text()!r})"


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

class Ring:
    """Generators of the expression ring for one lattice size.

    >>> R = Ring(2)
    >>> (R.x(3) * R.E(1)).to_text()
    'x3*E1'
    """

    def __init__(self, n: int):
        _check_n(n)
        self.n = n

    def const(self, c: Scalar) -> Expr:
        return Expr.const(self.n, c)

    @property
    def zero(self) -> Expr:
        return Expr(self.n)

    @property
    def one(self) -> Expr:
        return Expr.const(self.n, 1)

    def x(self, a: int) -> Expr:
        i = var_index(self.n, a)
        m = [0] * (3 * self.n)
        m[i] = 1
        return Expr(self.n, {tuple(m): Fraction(1)})

    def q(self, j: int) -> Expr:
        """Position ``x^j``, ``j = 1..n``."""
        if not 1 <= j <= self.n:
            raise DomainError(f"position index {j} outside 1..{self.n}")
        return self.x(j)

    def p(self, j: int) -> Expr:
        """Momentum ``x^{n+j}``, ``j = 1..n``."""
        if not 1 <= j <= self.n:
            raise DomainError(f"momentum index {j} outside 1..{self.n}")
        return self.x(self.n + j)

    @property
    def t(self) -> Expr:
        m = [0] * (3 * self.n)
        m[_time_slot(self.n)] = 1
        return Expr(self.n, {tuple(m): Fraction(1)})

    def E(self, j: int) -> Expr:
        """Atom ``exp(x^j - x^{j+1})``; ``E(0)`` and ``E(n)`` are zero by convention."""
        if j == 0 or j == self.n:
            return self.zero
        if not 1 <= j <= self.n - 1:
            raise DomainError(f"atom index {j} outside 0..{self.n}")
        m = [0] * (3 * self.n)
        m[_atom_slot(self.n, j)] = 1
        return Expr(self.n, {tuple(m): Fraction(1)})

    def parse(self, text: str):
        return parse(text, self.n)


def _parse_monomial(n: int, s) -> Monomial:
    if isinstance(s, (tuple, list)) and all(isinstance(v, (int, np.integer)) for v in s):
        if len(s) != 3 * n:
            raise DomainError(f"exponent vector must have length {3 * n}")
        if any(v < 0 for v in s):
            raise DomainError("negative exponents are not allowed")
        return tuple(int(v) for v in s)
    if isinstance(s, Mapping):
        items = s.items()
    else:
        s = str(s).strip()
        if s in ("", "1"):
            return (0,) * (3 * n)
        items = []
        for factor in s.split("*"):
            name, _, e = factor.strip().partition("^")
            items.append((name, int(e) if e else 1))
    m = [0] * (3 * n)
    for name, e in items:
        if e < 0:
            raise DomainError("negative exponents are not allowed")
        mt = re.fullmatch(r"E(\d+)", name)
        if mt:
            j = int(mt.group(1))
            if not 1 <= j <= n - 1:
                raise DomainError(f"atom E{j} outside E1..E{n - 1} for n={n}")
            m[_atom_slot(n, j)] += e
        else:
            m[var_index(n, name)] += e
    return tuple(m)


def normalize(n: int, raw: Iterable) -> Expr:
    """Canonical expression from ``(coefficient, monomial)`` pairs.

    A monomial is an exponent vector, a ``{name: exponent}`` mapping, or a
    string such as ``"x3^2*E1"``.  Zero coefficients are dropped and equal
    monomials merged.
    """
    _check_n(n)
    out: dict = {}
    for c, mono in raw:
        m = _parse_monomial(n, mono)
        out[m] = out.get(m, 0) + _to_fraction(c)
    return Expr(n, {m: c for m, c in out.items() if c})


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def diff(e, var):
    return e.diff(var)


def evaluate(e, x, t: float | None = None) -> float:
    return e.eval(x, t)


def equals(a, b) -> bool:
    if a.n != b.n:
        raise DomainError(f"cannot compare expressions with n={a.n} and n={b.n}")
    if isinstance(a, Expr) and isinstance(b, Expr):
        return a == b
    return RationalExpr.of(a) == RationalExpr.of(b)


def to_json(e) -> dict:
    return e.to_json()


def from_json(obj: Mapping):
    n = int(obj["n"])
    if "terms" in obj:
        return normalize(n, obj["terms"])
    return RationalExpr(normalize(n, obj["num"]), normalize(n, obj["den"]))


_NAME = re.compile(r"x(\d+)|t|E(\d+)")


def parse(text: str, n: int):
    """Parse infix text (``+ - * / ^ **`` and parentheses) into an expression.

    Accepts the output of :meth:`Expr.to_text` and :meth:`RationalExpr.to_text`
    as well as hand-written forms such as ``"1/2*(x3^2 + E1)"``.  Division by
    a non-constant yields a :class:`RationalExpr`.
    """
    _check_n(n)
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    R = Ring(n)

    def lift(v):
        return v if isinstance(v, (Expr, RationalExpr)) else R.const(v)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if not _NAME.fullmatch(node.id):
                raise DomainError(f"unknown symbol {node.id!r}")
            if node.id.startswith("E"):
                j = int(node.id[1:])
                if not 1 <= j <= n - 1:
                    raise DomainError(f"atom {node.id} outside E1..E{n - 1} for n={n}")
                return R.E(j)
            return R.t if node.id == "t" else R.x(int(node.id[1:]))
        if isinstance(node, ast.UnaryOp):
            v = walk(node.operand)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
        if isinstance(node, ast.BinOp):
            a, b = walk(node.left), walk(node.right)
            op = node.op
            if isinstance(op, ast.Add):
                return a + b
            if isinstance(op, ast.Sub):
                return a - b
            if isinstance(op, ast.Mult):
                return a * b
            if isinstance(op, ast.Div):
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    return a / b
                return lift(a) / b
            if isinstance(op, ast.Pow):
                if not (isinstance(b, Fraction) and b.denominator == 1):
                    raise DomainError("exponents must be integer literals")
                return a ** int(b)
        raise DomainError(f"unsupported syntax in {text!r}")

    return lift(walk(tree))


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

def _unpack_state(n: int, x, t):
    if hasattr(x, "x") and hasattr(x, "time"):
        t = x.time if t is None else t
        x = x.x
    xv = np.asarray(x, dtype=float)
    if xv.shape[0] != 2 * n:
        raise DomainError(f"state has {xv.shape[0]} coordinates, expected {2 * n}")
    return xv, 0.0 if t is None else float(t)


_COMPILED: dict = {}


def _compile(e: Expr):
    key = e
    f = _COMPILED.get(key)
    if f is not None:
        return f
    n = e.n
    items = e.sorted_terms()
    if items:
        exps = np.array([m for m, _ in items], dtype=np.int64)
        coeffs = np.array([float(c) for _, c in items])
    else:
        exps = np.zeros((0, 3 * n), dtype=np.int64)
        coeffs = np.zeros(0)
    used = np.nonzero(exps.any(axis=0))[0] if len(items) else np.zeros(0, dtype=np.int64)
    exps_used = exps[:, used]

    def f(X, t=0.0):
        X = np.asarray(X, dtype=float)
        tail = X.shape[1:]
        if not len(items):
            return np.zeros(tail) if tail else 0.0
        t_arr = np.broadcast_to(np.asarray(t, dtype=float), tail)
        atoms = np.exp(X[: n - 1] - X[1:n]) if n > 1 else np.zeros((0,) + tail)
        V = np.concatenate([X, t_arr[None, ...], atoms], axis=0)[used]
        # (terms, used vars, ...) powers, then product over vars
        P = np.prod(V[None, ...] ** exps_used.reshape(exps_used.shape + (1,) * len(tail)), axis=1)
        return np.tensordot(coeffs, P, axes=(0, 0))

    if len(_COMPILED) > 4096:
        _COMPILED.clear()
    _COMPILED[key] = f
    return f

