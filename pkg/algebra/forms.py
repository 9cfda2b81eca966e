"""Integer symmetric bilinear forms and the basis manoeuvres built on them.

Convention used everywhere: ``<x, y> = xᵗ g y`` and a basis change ``P`` acts
by ``g ↦ Pᵗ g P``; the columns of ``P`` are the new basis vectors.
"""
import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from algebra.ring import IntMatrix, smith_normal_form
from core.config import config_manager
from core.exceptions import FormError, SearchExhaustedError

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


@dataclass(frozen=True)
class SymForm:
    """Square symmetric integer matrix."""
    matrix: IntMatrix

    def __post_init__(self) -> None:
        if not self.matrix.is_symmetric():
            raise FormError(f"form is not symmetric: {self.matrix.tolist()}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "SymForm":
        return cls(IntMatrix.from_rows(rows, len(rows)))

    @classmethod
    def identity(cls, k: int) -> "SymForm":
        return cls(IntMatrix.identity(k))

    @classmethod
    def diagonal(cls, entries: Sequence[int]) -> "SymForm":
        k = len(entries)
        return cls.from_rows([[entries[i] if i == j else 0 for j in range(k)] for i in range(k)])

    @classmethod
    def hyperbolic(cls, copies: int = 1) -> "SymForm":
        k = 2 * copies
        rows = [[0] * k for _ in range(k)]
        for c in range(copies):
            rows[2 * c][2 * c + 1] = rows[2 * c + 1][2 * c] = 1
        return cls.from_rows(rows)

    @property
    def rank(self) -> int:
        return self.matrix.rows

    def __getitem__(self, index: Tuple[int, int]) -> int:
        return self.matrix[index]

    def det(self) -> int:
        return self.matrix.det()

    def is_unimodular(self) -> bool:
        return self.det() in (1, -1)

    def require_unimodular(self) -> "SymForm":
        if not self.is_unimodular():
            raise FormError(f"form is not unimodular (det {self.det()})")
        return self

    def is_even(self) -> bool:
        return all(self.matrix[i, i] % 2 == 0 for i in range(self.rank))

    def value(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(x, self.matrix.apply(y)))

    def norm(self, x: Sequence[int]) -> int:
        return self.value(x, x)

    def transform(self, P: "IntMatrix | BasisChange") -> "SymForm":
        """Return Pᵗ g P."""
        M = P.matrix if isinstance(P, BasisChange) else P
        return SymForm(M.transpose() @ self.matrix @ M)

    def inverse(self) -> "SymForm":
        self.require_unimodular()
        return SymForm(self.matrix.inverse())

    def direct_sum(self, other: "SymForm") -> "SymForm":
        a, b = self.rank, other.rank
        rows = [list(r) + [0] * b for r in self.matrix.entries]
        rows += [[0] * a + list(r) for r in other.matrix.entries]
        return SymForm.from_rows(rows)

    def tolist(self) -> List[List[int]]:
        return self.matrix.tolist()


@dataclass(frozen=True)
class BasisChange:
    """Unimodular change of basis; columns are the new basis vectors."""
    matrix: IntMatrix

    def __post_init__(self) -> None:
        if not self.matrix.is_unimodular():
            raise FormError(f"basis change is not unimodular: {self.matrix.tolist()}")

    @classmethod
    def identity(cls, k: int) -> "BasisChange":
        return cls(IntMatrix.identity(k))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "BasisChange":
        return cls(IntMatrix.from_columns(columns))

    @property
    def rank(self) -> int:
        return self.matrix.rows

    def column(self, j: int) -> Vector:
        return self.matrix.column(j)

    @property
    def last_column(self) -> Vector:
        return self.matrix.column(self.rank - 1)

    def then(self, other: "BasisChange") -> "BasisChange":
        """Apply ``self`` first and ``other`` in the resulting coordinates."""
        return BasisChange(self.matrix @ other.matrix)

    def inverse(self) -> "BasisChange":
        return BasisChange(self.matrix.inverse())

    def substitution(self) -> IntMatrix:
        """Matrix Q with old α_i = Σ_a Q[a][i] α'_a, the dual action on the wedge."""
        return self.matrix.transpose()

    def dual_basis(self) -> IntMatrix:
        """Columns are the new wedge generators α'_a in old coordinates (P^{-T})."""
        return self.matrix.inverse().transpose()

    def is_identity(self) -> bool:
        return self.matrix == IntMatrix.identity(self.rank)

    def tolist(self) -> List[List[int]]:
        return self.matrix.tolist()


class PrimitiveVector(NamedTuple):
    """Outcome of ``find_primitive_divisible``."""
    vector: Vector
    norm: int
    path: str


class ModPDiagonalization(NamedTuple):
    """Congruence diagonalization over F_p; entries reduced to 0..p-1."""
    matrix: IntMatrix
    diagonal: Tuple[int, ...]
    p: int


class CharacteristicBasis(NamedTuple):
    """Basis change whose last vector is characteristic (or identity for even forms)."""
    change: BasisChange
    vector: Vector


def is_primitive(v: Sequence[int]) -> bool:
    return math.gcd(*v) == 1 if v else False


def iter_small_vectors(k: int, bound: int) -> Iterator[Vector]:
    """Nonzero integer vectors with |coordinates| <= bound, by increasing sup-norm.

    Within a shell the order is lexicographic over the value sequence
    0, 1, -1, 2, -2, ... so results are deterministic.
    """
    for shell in range(1, bound + 1):
        values = [0]
        for a in range(1, shell + 1):
            values += [a, -a]
        for v in itertools.product(values, repeat=k):
            if max(abs(x) for x in v) == shell:
                yield v


def search_vector(
    k: int,
    predicate: Callable[[Vector], bool],
    bound: int,
    lattice: Optional[Sequence[Sequence[int]]] = None,
) -> Optional[Vector]:
    """First primitive vector (optionally inside ``lattice``) satisfying ``predicate``."""
    gens = list(lattice) if lattice is not None else None
    dim = len(gens) if gens is not None else k
    for coeffs in iter_small_vectors(dim, bound):
        if gens is None:
            v = coeffs
        else:
            v = tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(k))
        if is_primitive(v) and predicate(v):
            return v
    return None


def diagonalize_mod_p(g: SymForm, p: int) -> ModPDiagonalization:
    """Congruence-diagonalize ``g`` over F_p for an odd prime ``p``."""
    if p == 2 or p < 2:
        raise FormError(f"diagonalize_mod_p needs an odd prime, got {p}")
    k = g.rank
    A = [[x % p for x in row] for row in g.matrix.entries]
    P = [[int(i == j) for j in range(k)] for i in range(k)]

    def col_add(target: int, source: int, c: int) -> None:
        for row in P:
            row[target] = (row[target] + c * row[source]) % p
        for row in A:
            row[target] = (row[target] + c * row[source]) % p
        A[target] = [(a + c * b) % p for a, b in zip(A[target], A[source])]

    def swap(i: int, j: int) -> None:
        for row in P:
            row[i], row[j] = row[j], row[i]
        for row in A:
            row[i], row[j] = row[j], row[i]
        A[i], A[j] = A[j], A[i]

    for t in range(k):
        if A[t][t] == 0:
            j = next((j for j in range(t + 1, k) if A[j][j] != 0), None)
            if j is not None:
                swap(t, j)
            else:
                j = next((j for j in range(t + 1, k) if A[t][j] != 0), None)
                if j is None:
                    continue
                col_add(t, j, 1)
        inv = pow(A[t][t], -1, p)
        for j in range(t + 1, k):
            if A[t][j]:
                col_add(j, t, (-A[t][j] * inv) % p)

    return ModPDiagonalization(
        IntMatrix.from_rows(P, k),
        tuple(A[i][i] for i in range(k)),
        p,
    )


def _lift_symmetric(v: Sequence[int], p: int) -> Vector:
    """Representatives in (-p/2, p/2]."""
    return tuple(x - p if x > p // 2 else x for x in (y % p for y in v))


def _f3_isotropic(g: SymForm) -> Optional[Vector]:
    diag = diagonalize_mod_p(g, 3)
    P = diag.matrix
    for i, d in enumerate(diag.diagonal):
        if d == 0:
            return _lift_symmetric(P.column(i), 3)
    d1, d2, d3 = diag.diagonal[:3]
    if (d1 + d2) % 3 == 0:
        x = (1, 1, 0)
    elif (d1 + d3) % 3 == 0:
        x = (1, 0, 1)
    elif (d2 + d3) % 3 == 0:
        x = (0, 1, 1)
    else:
        x = (1, 1, 1)
    x = x + (0,) * (g.rank - 3)
    return _lift_symmetric(P.apply(x), 3)


def find_primitive_divisible(g: SymForm, m: int, bound: Optional[int] = None) -> PrimitiveVector:
    """Primitive vector v with m | <v, v>, for m in {3, 8}.

    Paths are tried in order: a basis vector, the F_3 diagonalization lift
    (m = 3) or sums of two basis vectors (m = 8), then a bounded search.
    """
    if m not in (3, 8):
        raise FormError(f"divisibility modulus must be 3 or 8, got {m}")
    g.require_unimodular()
    threshold = 3 if m == 3 else 5
    if g.rank < threshold:
        raise FormError(f"rank {g.rank} is below {threshold}, needed for divisibility by {m}")
    k = g.rank

    for i in range(k):
        if g[i, i] % m == 0:
            v = tuple(int(i == j) for j in range(k))
            return PrimitiveVector(v, g[i, i], "basis")

    if m == 3:
        v = _f3_isotropic(g)
        if v is not None and is_primitive(v) and g.norm(v) % 3 == 0:
            return PrimitiveVector(v, g.norm(v), "f3-lift")
    else:
        for i, j in itertools.combinations(range(k), 2):
            for sign in (1, -1):
                v = tuple(1 if t == i else sign if t == j else 0 for t in range(k))
                if g.norm(v) % 8 == 0:
                    return PrimitiveVector(v, g.norm(v), "pair")

    if bound is None:
        bound = config_manager.config.search.form_search_bound
    logger.debug("falling back to exhaustive search for m=%d, bound %d", m, bound)
    v = search_vector(k, lambda x: g.norm(x) % m == 0, bound)
    if v is None:
        raise SearchExhaustedError(f"no primitive vector with {m} | <v,v>", bound)
    return PrimitiveVector(v, g.norm(v), "search")


def extend_to_basis(v: Sequence[int]) -> BasisChange:
    """Unimodular matrix whose last column is ``v``."""
    v = tuple(int(x) for x in v)
    if not is_primitive(v):
        raise FormError(f"vector {v} is not primitive")
    k = len(v)
    snf = smith_normal_form(IntMatrix.from_rows([[x] for x in v], 1))
    M = snf.U.inverse()
    columns = M.columns()
    if columns[0] != v:
        columns[0] = tuple(-x for x in columns[0])
    return BasisChange.from_columns(columns[1:] + [columns[0]]) if k > 1 else BasisChange.from_columns([v])


def _solve_mod_2(A: Sequence[Sequence[int]], b: Sequence[int]) -> Optional[Vector]:
    k = len(A)
    rows = [[x % 2 for x in row] + [bi % 2] for row, bi in zip(A, b)]
    pivots = []
    r = 0
    for c in range(k):
        pivot = next((i for i in range(r, k) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(k):
            if i != r and rows[i][c]:
                rows[i] = [(a + b2) % 2 for a, b2 in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] for row in rows[r:]):
        return None
    x = [0] * k
    for i, c in enumerate(pivots):
        x[c] = rows[i][-1]
    return tuple(x)


def characteristic_vector(g: SymForm) -> Vector:
    """The characteristic class mod 2, as a 0/1 vector: g·w ≡ diag(g) mod 2."""
    g.require_unimodular()
    diag = [g[i, i] for i in range(g.rank)]
    w = _solve_mod_2(g.matrix.entries, diag)
    if w is None:
        raise FormError("no characteristic vector; form is not unimodular mod 2")
    return w


def characteristic_basis(g: SymForm) -> CharacteristicBasis:
    """Basis whose last vector is characteristic; even forms keep the identity."""
    w = characteristic_vector(g)
    if not any(w):
        return CharacteristicBasis(BasisChange.identity(g.rank), w)
    return CharacteristicBasis(extend_to_basis(w), w)


def random_unimodular(k: int, rng: random.Random, steps: int = 8, bound: int = 2) -> IntMatrix:
    """Product of random elementary matrices with small multipliers."""
    M = [[int(i == j) for j in range(k)] for i in range(k)]
    if k < 2:
        return IntMatrix.from_rows(M, k)
    for _ in range(steps):
        i, j = rng.sample(range(k), 2)
        c = rng.choice([x for x in range(-bound, bound + 1) if x != 0])
        for row in M:
            row[j] += c * row[i]
    if rng.random() < 0.5:
        perm = list(range(k))
        rng.shuffle(perm)
        M = [[row[p] for p in perm] for row in M]
    return IntMatrix.from_rows(M, k)


def random_equivalent_form(seed: SymForm, rng: random.Random, steps: int = 8) -> SymForm:
    """Pᵗ g P for a random unimodular P."""
    return seed.transform(random_unimodular(seed.rank, rng, steps))
