"""Component containers for vector fields, one-forms and square matrices.

All containers are immutable and carry the lattice size ``n`` of their
entries; combining objects of different ``n`` raises :class:`DomainError`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import DomainError
from .expr import Expr, RationalExpr, Ring

Scalar = (int, Fraction, np.integer)


def lift(n: int, v):
    if isinstance(v, (Expr, RationalExpr)):
        if v.n != n:
            raise DomainError(f"entry has n={v.n}, container has n={n}")
        return v
    if isinstance(v, Scalar):
        return Expr.const(n, v)
    raise TypeError(f"cannot use {type(v).__name__} as a component")


def simplify(v):
    return v.simplify() if isinstance(v, RationalExpr) else v


def _text(v) -> str:
    return v.to_text()


class _Components:
    """Shared behaviour of length-``2n`` component tuples."""

    __slots__ = ("components", "n")

    def __init__(self, components: Iterable, n: int | None = None):
        comps = list(components)
        if n is None:
            for c in comps:
                if isinstance(c, (Expr, RationalExpr)):
                    n = c.n
                    break
            else:
                n = len(comps) // 2
        if len(comps) != 2 * n:
            raise DomainError(f"expected {2 * n} components for n={n}, got {len(comps)}")
        self.n = n
        self.components = tuple(lift(n, c) for c in comps)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def _check(self, other):
        if not isinstance(other, type(self)):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.n != self.n:
            raise DomainError(f"cannot combine n={self.n} with n={other.n}")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def eval(self, x, t: float | None = None) -> np.ndarray:
        return np.array([c.eval(x, t) for c in self.components])

    def to_text(self) -> list[str]:
        return [_text(c) for c in self.components]

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, {self.to_text()})"


class VectorField(_Components):
    """Contravariant field ``eta^a(x, t)``, ``a = 1..2n``."""

    def _new(self, comps):
        return VectorField(comps, self.n)

    def __add__(self, other):
        self._check(other)
        return self._new(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._check(other)
        return self._new(a - b for a, b in zip(self, other))

    def __neg__(self):
        return self._new(-a for a in self)

    def __mul__(self, c):
        if isinstance(c, (VectorField, OneForm)):
            return NotImplemented
        return self._new(a * c for a in self)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.n == other.n and all(a == b for a, b in zip(self, other))

    __hash__ = None

    def diff(self, var) -> "VectorField":
        return self._new(a.diff(var) for a in self)

    def replace(self, index: int, value) -> "VectorField":
        """Copy with the 1-based component ``index`` set to ``value``."""
        comps = list(self.components)
        comps[index - 1] = lift(self.n, value)
        return self._new(comps)


class OneForm(_Components):
    """Covariant components ``l_a`` plus the scalar companion ``l_0``."""

    __slots__ = ("scalar_part",)

    def __init__(self, components: Iterable, n: int | None = None, scalar_part=None):
        super().__init__(components, n)
        self.scalar_part = None if scalar_part is None else lift(self.n, scalar_part)

    def _new(self, comps):
        return OneForm(comps, self.n)

    def __add__(self, other):
        self._check(other)
        return self._new(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._check(other)
        return self._new(a - b for a, b in zip(self, other))

    def __neg__(self):
        return self._new(-a for a in self)

    def __mul__(self, c):
        if isinstance(c, (VectorField, OneForm)):
            return NotImplemented
        return self._new(a * c for a in self)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return self.n == other.n and all(a == b for a, b in zip(self, other))

    __hash__ = None

    def contract(self, v: VectorField):
        """``l_a v^a``."""
        if v.n != self.n:
            raise DomainError(f"cannot contract n={self.n} with n={v.n}")
        acc = Expr(self.n)
        for a, b in zip(self, v):
            acc = acc + a * b
        return simplify(acc) if isinstance(acc, RationalExpr) else acc

    def with_scalar_part(self, l0) -> "OneForm":
        return OneForm(self.components, self.n, l0)

    @staticmethod
    def gradient(phi) -> "OneForm":
        return OneForm([phi.diff(a) for a in range(1, 2 * phi.n + 1)], phi.n)


class Matrix:
    """Square ``2n x 2n`` matrix of exact entries."""

    __slots__ = ("entries", "n")

    def __init__(self, entries: Sequence[Sequence], n: int | None = None):
        rows = [list(r) for r in entries]
        if n is None:
            n = next((v.n for r in rows for v in r if isinstance(v, (Expr, RationalExpr))), len(rows) // 2)
        size = 2 * n
        if len(rows) != size or any(len(r) != size for r in rows):
            raise DomainError(f"expected a {size}x{size} matrix for n={n}")
        self.n = n
        self.entries = tuple(tuple(lift(n, v) for v in r) for r in rows)
        self._validate()

    def _validate(self):
        pass

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return Matrix([[int(i == j) for j in range(2 * n)] for i in range(2 * n)], n)

    @property
    def size(self) -> int:
        return 2 * self.n

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self) -> list[list]:
        return [list(r) for r in self.entries]

    def map(self, fn, cls=None) -> "Matrix":
        cls = cls or Matrix
        return cls([[fn(v) for v in r] for r in self.entries], self.n)

    def simplify(self) -> "Matrix":
        return self.map(simplify, type(self))

    def transpose(self) -> "Matrix":
        return Matrix([list(c) for c in zip(*self.entries)], self.n)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.n == other.n and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    __hash__ = None

    def __add__(self, other):
        return Matrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)], self.n)

    def __sub__(self, other):
        return Matrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)], self.n)

    def __neg__(self):
        return self.map(lambda v: -v, type(self))

    def __mul__(self, c):
        if isinstance(c, (Matrix, VectorField)):
            return NotImplemented
        return self.map(lambda v: v * c, type(self))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if other.n != self.n:
                raise DomainError(f"cannot multiply n={self.n} by n={other.n}")
            return Matrix(linalg.matmul(self.rows(), other.rows()), self.n).simplify()
        if isinstance(other, VectorField):
            if other.n != self.n:
                raise DomainError(f"cannot apply n={self.n} to n={other.n}")
            return [simplify(v) for v in linalg.matvec(self.rows(), list(other))]
        return NotImplemented

    def apply(self, vec: Sequence) -> list:
        return [simplify(v) for v in linalg.matvec(self.rows(), [lift(self.n, v) for v in vec])]

    def det(self):
        return simplify(linalg.det(self.rows()))

    def adjugate(self) -> "Matrix":
        return Matrix(linalg.adjugate(self.rows()), self.n)

    def inverse(self) -> "Matrix":
        return Matrix(linalg.inverse(self.rows()), self.n).simplify()

    def diff(self, var) -> "Matrix":
        return self.map(lambda v: v.diff(var), type(self))

    def is_zero(self) -> bool:
        return all(v.is_zero() for r in self.entries for v in r)

    def is_polynomial(self) -> bool:
        return all(isinstance(simplify(v), Expr) for r in self.entries for v in r)

    def eval(self, x, t: float | None = None) -> np.ndarray:
        return np.array([[v.eval(x, t) for v in r] for r in self.entries])

    def to_text(self) -> list[list[str]]:
        return [[_text(v) for v in r] for r in self.entries]

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, {self.to_text()})"


class SigmaMatrix(Matrix):
    """Antisymmetric Lagrange-bracket matrix ``sigma_ab``."""

    __slots__ = ()

    def _validate(self):
        m = self.size
        for a in range(m):
            for b in range(a, m):
                if not self.entries[a][b] == -self.entries[b][a]:
                    raise DomainError(f"sigma is not antisymmetric at ({a + 1},{b + 1})")

    @classmethod
    def canonical(cls, n: int) -> "SigmaMatrix":
        """Block form ``[[0, I], [-I, 0]]``."""
        rows = [[0] * (2 * n) for _ in range(2 * n)]
        for j in range(n):
            rows[j][n + j] = 1
            rows[n + j][j] = -1
        return cls(rows, n)

    def as_matrix(self) -> Matrix:
        return Matrix(self.entries, self.n)


def zero_vector(n: int) -> VectorField:
    return VectorField([0] * (2 * n), n)


def constant_field(n: int, values: Sequence) -> VectorField:
    R = Ring(n)
    return VectorField([R.const(v) for v in values], n)
