"""Exact rational scalars and dense rational matrices.

Every number in the package is a ``gmpy2.mpq``.  ``Fraction`` and ``int``
inputs are accepted everywhere and converted on the way in.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq

from .errors import DimensionMismatch, ParseError

Rational = type(mpq(0))
Vector = tuple  # tuple of mpq

ZERO = mpq(0)
ONE = mpq(1)

_RAT_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def Q(value, den=None) -> mpq:
    """Coerce ``value`` (or ``value/den``) to an exact rational."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, Fraction)) or type(value).__name__ == "mpz":
        return mpq(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise TypeError("floats are not admitted; pass an int, Fraction or 'p/q' string")
    return mpq(value)


def parse_rational(text: str) -> mpq:
    s = text.strip()
    if not _RAT_RE.match(s):
        raise ParseError(f"not a rational literal: {text!r}")
    if s.endswith("/0"):
        raise ParseError(f"zero denominator: {text!r}")
    return mpq(s)


def fmt(x) -> str:
    """Canonical text form: ``p/q`` in lowest terms, or an integer."""
    return str(Q(x))


def vec(values: Iterable) -> tuple:
    return tuple(Q(v) for v in values)


def dot(a: Sequence, b: Sequence):
    s = ZERO
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return s


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a):
    return tuple(c * x for x in a)


def vneg(a):
    return tuple(-x for x in a)


def is_zero_vector(a) -> bool:
    return all(x == 0 for x in a)


def denominator_bound(values: Iterable) -> int:
    """Largest denominator among ``values`` (1 for an empty collection)."""
    d = 1
    for v in values:
        d = max(d, int(Q(v).denominator))
    return d


def height(x) -> int:
    """max(|numerator|, denominator) of a rational."""
    x = Q(x)
    return max(abs(int(x.numerator)), int(x.denominator))


def primitive_integer(a: Sequence) -> tuple:
    """Positive rescaling of a rational vector to a primitive integer vector."""
    l = 1
    for x in a:
        l = gmpy2.lcm(l, Q(x).denominator)
    ints = [int(Q(x) * l) for x in a]
    g = 0
    for v in ints:
        g = gmpy2.gcd(g, v)
    g = int(g) or 1
    return tuple(v // g for v in ints)


class Matrix:
    """Immutable dense matrix over the rationals.

    Zero-sized shapes are allowed; maps out of or into the trivial space
    {0} are 0 x n and n x 0 matrices.
    """

    __slots__ = ("rows", "nrows", "ncols", "_hash")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(Q(x) for x in r) for r in rows)
        if ncols is None:
            if not data:
                raise ValueError("ncols required for a matrix with no rows")
            ncols = len(data[0])
        for r in data:
            if len(r) != ncols:
                raise DimensionMismatch(f"ragged row: expected {ncols} entries, got {len(r)}")
        self.rows = data
        self.nrows = len(data)
        self.ncols = ncols
        self._hash = None

    @classmethod
    def _raw(cls, rows: tuple, ncols: int) -> "Matrix":
        m = object.__new__(cls)
        m.rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        m._hash = None
        return m

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls._raw(tuple((ZERO,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._raw(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "Matrix":
        return cls._raw(tuple(tuple(Q(c[i]) for c in cols) for i in range(nrows)), len(cols))

    @classmethod
    def block(cls, blocks: Sequence[Sequence["Matrix"]]) -> "Matrix":
        """Assemble a block matrix; every block row must agree in height."""
        rows = []
        ncols = sum(b.ncols for b in blocks[0])
        for brow in blocks:
            h = brow[0].nrows
            if any(b.nrows != h for b in brow) or sum(b.ncols for b in brow) != ncols:
                raise DimensionMismatch("inconsistent block shapes")
            for i in range(h):
                rows.append(tuple(x for b in brow for x in b.rows[i]))
        return cls._raw(tuple(rows), ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.ncols)]

    def T(self) -> "Matrix":
        return Matrix._raw(tuple(self.column(j) for j in range(self.ncols)), self.nrows)

    def apply(self, x: Sequence) -> tuple:
        if len(x) != self.ncols:
            raise DimensionMismatch(f"vector of length {len(x)} applied to {self.nrows}x{self.ncols} matrix")
        return tuple(dot(r, x) for r in self.rows)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot compose {self.shape} with {other.shape}")
        cols = other.columns()
        return Matrix._raw(tuple(tuple(dot(r, c) for c in cols) for r in self.rows), other.ncols)

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix._raw(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix._raw(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.ncols)

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def scale(self, c) -> "Matrix":
        c = Q(c)
        return Matrix._raw(tuple(tuple(c * a for a in r) for r in self.rows), self.ncols)

    def _same_shape(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape {self.shape} != {other.shape}")

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.shape, self.rows))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(fmt(x) for x in r) for r in self.rows)
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def entries(self):
        for r in self.rows:
            yield from r

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Matrix":
        rows = range(self.nrows) if rows is None else rows
        cols = range(self.ncols) if cols is None else cols
        cols = list(cols)
        return Matrix._raw(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(cols))

    def rref(self) -> tuple[list[list], list[int]]:
        """Reduced row echelon form and pivot column indices."""
        a = [list(r) for r in self.rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            p = next((i for i in range(r, self.nrows) if a[i][c] != 0), None)
            if p is None:
                continue
            a[r], a[p] = a[p], a[r]
            inv = 1 / a[r][c]
            a[r] = [x * inv for x in a[r]]
            for i in range(self.nrows):
                if i != r and a[i][c] != 0:
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            pivots.append(c)
            r += 1
            if r == self.nrows:
                break
        return a, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> tuple["Matrix", list[int]]:
        """Basis of the kernel as the columns of a matrix, plus the free columns.

        Row ``free[k]`` of the basis matrix is the k-th unit vector, so the
        coordinates of a kernel vector are simply its free entries.
        """
        a, pivots = self.rref()
        free = [c for c in range(self.ncols) if c not in pivots]
        basis = []
        for fc in free:
            v = [ZERO] * self.ncols
            v[fc] = ONE
            for r, pc in enumerate(pivots):
                v[pc] = -a[r][fc]
            basis.append(v)
        return Matrix.from_columns(basis, self.ncols), free

    def inverse(self) -> "Matrix":
        n = self.nrows
        if n != self.ncols:
            raise DimensionMismatch("inverse of a non-square matrix")
        aug = Matrix.block([[self, Matrix.identity(n)]])
        a, pivots = aug.rref()
        if pivots[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return Matrix._raw(tuple(tuple(row[n:]) for row in a), n)

    def max_denominator(self) -> int:
        return denominator_bound(self.entries())
