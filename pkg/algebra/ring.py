"""Exact arithmetic over localized integers Z[1/S] and integer matrix normal forms.

Every other module builds on three value types:

* ``PrimeSet`` - the finite set S of inverted primes.
* ``LocalScalar`` - an element of Z[1/S], stored as a reduced ``Fraction``.
* ``IntMatrix`` - an immutable integer matrix.

Smith normal form follows the classical row/column gcd reduction with the
pivot chosen as the entry of minimal nonzero absolute value (ties go to the
lowest (row, col) index) so that transforms are reproducible.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import sympy

from core.exceptions import RingError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, "LocalScalar"]


@dataclass(frozen=True)
class PrimeSet:
    """Strictly ascending tuple of distinct primes."""
    primes: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        primes = tuple(int(p) for p in self.primes)
        object.__setattr__(self, "primes", primes)
        for p in primes:
            if not sympy.isprime(p):
                raise RingError(f"{p} is not prime")
        if any(a >= b for a, b in zip(primes, primes[1:])):
            raise RingError(f"primes must be strictly ascending: {list(primes)}")

    @classmethod
    def of(cls, primes: Iterable[int]) -> "PrimeSet":
        """Build a prime set from any iterable, sorting and dropping duplicates."""
        return cls(tuple(sorted(set(int(p) for p in primes))))

    def __contains__(self, p: object) -> bool:
        return p in self.primes

    def __iter__(self):
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __str__(self) -> str:
        return "{" + ",".join(str(p) for p in self.primes) + "}"

    def union(self, other: "PrimeSet") -> "PrimeSet":
        return PrimeSet.of(self.primes + other.primes)

    def strip(self, a: int) -> int:
        """Divide every prime of S out of ``a``; the sign is kept."""
        if a == 0:
            return 0
        for p in self.primes:
            while a % p == 0:
                a //= p
        return a

    def supports(self, denominator: int) -> bool:
        """True when every prime factor of ``denominator`` lies in S."""
        return denominator != 0 and abs(self.strip(denominator)) == 1


INTEGERS = PrimeSet()


class LocalScalar:
    """Element of Z[1/S]."""

    __slots__ = ("_value", "_ring")

    def __init__(self, value: Union[int, Fraction, str], ring: PrimeSet = INTEGERS):
        value = Fraction(value)
        if not ring.supports(value.denominator):
            raise RingError(f"{value} is not an element of Z[1/S] for S={ring}")
        self._value = value
        self._ring = ring

    @property
    def value(self) -> Fraction:
        return self._value

    @property
    def ring(self) -> PrimeSet:
        return self._ring

    @property
    def numerator(self) -> int:
        return self._value.numerator

    @property
    def denominator(self) -> int:
        return self._value.denominator

    def _coerce(self, other: Number) -> Fraction:
        if isinstance(other, LocalScalar):
            if other.ring != self._ring:
                raise RingError(f"ring mismatch: {self._ring} vs {other.ring}")
            return other.value
        if isinstance(other, (int, Fraction)):
            return Fraction(other)
        return NotImplemented

    def __add__(self, other: Number) -> "LocalScalar":
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return LocalScalar(self._value + value, self._ring)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "LocalScalar":
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return LocalScalar(self._value - value, self._ring)

    def __rsub__(self, other: Number) -> "LocalScalar":
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return LocalScalar(value - self._value, self._ring)

    def __mul__(self, other: Number) -> "LocalScalar":
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return LocalScalar(self._value * value, self._ring)

    __rmul__ = __mul__

    def __neg__(self) -> "LocalScalar":
        return LocalScalar(-self._value, self._ring)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LocalScalar):
            return self._value == other.value and self._ring == other.ring
        if isinstance(other, (int, Fraction)):
            return self._value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._value, self._ring))

    def __bool__(self) -> bool:
        return self._value != 0

    def __repr__(self) -> str:
        return f"LocalScalar({self._value}, S={self._ring})"

    def __str__(self) -> str:
        return str(self._value)

    def is_zero(self) -> bool:
        return self._value == 0

    def inverse(self) -> "LocalScalar":
        if not is_unit(self):
            raise RingError(f"{self._value} is not a unit in Z[1/S] for S={self._ring}")
        return LocalScalar(1 / self._value, self._ring)


def scalar_arith(a: LocalScalar, b: LocalScalar, op: str) -> LocalScalar:
    """Add, subtract or multiply two scalars of the same ring."""
    if a.ring != b.ring:
        raise RingError(f"ring mismatch: {a.ring} vs {b.ring}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def is_unit(a: LocalScalar) -> bool:
    """True iff ``a`` is nonzero and its numerator is supported on S."""
    if a.is_zero():
        return False
    return abs(a.ring.strip(a.numerator)) == 1


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix; ``entries`` is a tuple of equal-length rows."""
    entries: Tuple[Tuple[int, ...], ...]
    ncols: int = -1

    def __post_init__(self) -> None:
        entries = tuple(tuple(int(x) for x in row) for row in self.entries)
        width = len(entries[0]) if entries else max(self.ncols, 0)
        if any(len(row) != width for row in entries):
            raise ValueError("IntMatrix rows must have equal length")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "ncols", width)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], ncols: int = -1) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in rows), ncols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: Optional[int] = None) -> "IntMatrix":
        if not columns:
            return cls.zeros(nrows or 0, 0)
        return cls.from_rows(zip(*columns))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows(((1 if i == j else 0) for j in range(n)) for i in range(n))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls.from_rows(((0,) * ncols for _ in range(nrows)), ncols)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return self.ncols

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i][j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self.entries[i]

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> List[Tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(self.columns(), self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.columns()
        return IntMatrix.from_rows(
            (tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in self.entries),
            other.cols,
        )

    def apply(self, vector: Sequence[int]) -> Tuple[int, ...]:
        if len(vector) != self.cols:
            raise ValueError("vector length does not match column count")
        return tuple(sum(a * b for a, b in zip(row, vector)) for row in self.entries)

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(self.rows, self.cols, [x for row in self.entries for x in row])

    def tolist(self) -> List[List[int]]:
        return [list(row) for row in self.entries]

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        return int(self.to_sympy().det(method="bareiss"))

    def is_unimodular(self) -> bool:
        return self.rows == self.cols and self.det() in (1, -1)

    def inverse(self) -> "IntMatrix":
        """Exact inverse of a unimodular matrix."""
        if not self.is_unimodular():
            raise RingError("only unimodular integer matrices have integer inverses")
        inv = self.to_sympy().inv()
        return IntMatrix.from_rows(
            (int(inv[i, j]) for j in range(self.cols)) for i in range(self.rows)
        )

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self.entries[i][j] == self.entries[j][i] for i in range(self.rows) for j in range(i)
        )


class SmithForm(NamedTuple):
    """Result of ``smith_normal_form``: U·A·V = D."""
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.shape)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(A: IntMatrix) -> SmithForm:
    """Smith normal form with explicit unimodular transforms."""
    m, n = A.shape
    D = [list(row) for row in A.entries]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i: int, j: int) -> None:
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i: int, j: int) -> None:
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(target: int, source: int, c: int) -> None:
        D[target] = [a + c * b for a, b in zip(D[target], D[source])]
        U[target] = [a + c * b for a, b in zip(U[target], U[source])]

    def add_col(target: int, source: int, c: int) -> None:
        for row in D:
            row[target] += c * row[source]
        for row in V:
            row[target] += c * row[source]

    t = 0
    while t < min(m, n):
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] != 0 and (pivot is None or abs(D[i][j]) < abs(D[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        p = D[t][t]

        clean = True
        for i in range(t + 1, m):
            q = D[i][t] // p
            if q:
                add_row(i, t, -q)
            if D[i][t] != 0:
                clean = False
        for j in range(t + 1, n):
            q = D[t][j] // p
            if q:
                add_col(j, t, -q)
            if D[t][j] != 0:
                clean = False
        if not clean:
            continue

        offending = next(
            (i for i in range(t + 1, m) if any(D[i][j] % p for j in range(t + 1, n))),
            None,
        )
        if offending is not None:
            add_row(t, offending, 1)
            continue
        t += 1

    for i in range(min(m, n)):
        if D[i][i] < 0:
            D[i] = [-x for x in D[i]]
            U[i] = [-x for x in U[i]]

    return SmithForm(
        IntMatrix.from_rows(U, m),
        IntMatrix.from_rows(D, n),
        IntMatrix.from_rows(V, n),
    )


def _as_fraction(x: Number) -> Fraction:
    return x.value if isinstance(x, LocalScalar) else Fraction(x)


def solve_linear(
    A: Sequence[Sequence[Number]],
    b: Sequence[Number],
    ring: PrimeSet = INTEGERS,
    ncols: Optional[int] = None,
) -> Optional[List[LocalScalar]]:
    """Solve A·x = b over Z[1/S]; returns None when no solution exists.

    Rows are scaled to integers, the system is put in Smith form, and each
    transformed right-hand side entry must be divisible by the S-free part of
    its diagonal entry.
    """
    m = len(A)
    if len(b) != m:
        raise ValueError("right-hand side length does not match row count")
    n = ncols if ncols is not None else (len(A[0]) if m else 0)

    int_rows = []
    rhs = []
    for row, bi in zip(A, b):
        fr = [_as_fraction(x) for x in row]
        fb = _as_fraction(bi)
        if len(fr) != n:
            raise ValueError("ragged coefficient matrix")
        scale = math.lcm(fb.denominator, *(x.denominator for x in fr)) if fr else fb.denominator
        int_rows.append([int(x * scale) for x in fr])
        rhs.append(int(fb * scale))

    if n == 0:
        return [] if all(x == 0 for x in rhs) else None

    snf = smith_normal_form(IntMatrix.from_rows(int_rows, n))
    c = snf.U.apply(rhs) if m else ()
    y: List[Fraction] = [Fraction(0)] * n
    for i in range(m):
        d = snf.D[i, i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                return None
            continue
        quotient = Fraction(c[i], d)
        if not ring.supports(quotient.denominator):
            return None
        y[i] = quotient
    x = [sum((Fraction(v) * yj for v, yj in zip(row, y)), Fraction(0)) for row in snf.V.entries]
    return [LocalScalar(v, ring) for v in x]


def integer_kernel(A: IntMatrix) -> List[Tuple[int, ...]]:
    """Basis of {x in Z^n : A·x = 0}."""
    snf = smith_normal_form(A)
    rank = snf.rank
    return [snf.V.column(j) for j in range(rank, A.cols)]


def lattice_basis(generators: Sequence[Sequence[int]], dim: int) -> List[Tuple[int, ...]]:
    """Basis of the sublattice of Z^dim spanned by ``generators``."""
    if not generators:
        return []
    G = IntMatrix.from_columns(generators)
    snf = smith_normal_form(G)
    Uinv = snf.U.inverse()
    basis = []
    for i, d in enumerate(snf.diagonal):
        if d == 0:
            break
        basis.append(tuple(d * x for x in Uinv.column(i)))
    return basis


def _integer_rows(rows: Sequence[Sequence[Number]], ncols: int) -> IntMatrix:
    scaled = []
    for row in rows:
        fr = [_as_fraction(x) for x in row]
        scale = math.lcm(*(x.denominator for x in fr)) if fr else 1
        scaled.append([int(x * scale) for x in fr])
    return IntMatrix.from_rows(scaled, ncols)


def matrix_rank(rows: Sequence[Sequence[Number]], ncols: int) -> int:
    """Rank of a rational matrix given by rows."""
    if not rows:
        return 0
    return smith_normal_form(_integer_rows(rows, ncols)).rank


def spans_free_module(rows: Sequence[Sequence[Number]], ring: PrimeSet, ncols: int) -> bool:
    """True when the rows generate all of Z[1/S]^ncols.

    Rescaling a row by the lcm of its denominators multiplies it by a unit, so
    the test reduces to every Smith invariant of the integer matrix being a
    unit of the ring.
    """
    if ncols == 0:
        return True
    if not rows:
        return False
    snf = smith_normal_form(_integer_rows(rows, ncols))
    diagonal = snf.diagonal
    return snf.rank == ncols and all(abs(ring.strip(d)) == 1 for d in diagonal[:ncols])
