"""Graded tensor algebra T(V) with its Lie bracket and squaring.

Lie elements are handled through their images in T(V). Quotients by the
quadratic relation ℒ = Σ g_ij v_i⊗v_j are computed degree by degree with
exact linear algebra.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from algebra.forms import SymForm
from algebra.ring import (
    INTEGERS,
    LocalScalar,
    PrimeSet,
    is_unit,
    matrix_rank,
    solve_linear,
    spans_free_module,
)
from core.config import config_manager
from core.exceptions import OracleBoundError, TensorError

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
Scalar = Union[int, Fraction, LocalScalar]


@dataclass(frozen=True)
class GradedBasis:
    """Named generators of V with their degrees."""
    generators: Tuple[Tuple[str, int], ...]

    def __post_init__(self) -> None:
        gens = tuple((str(name), int(deg)) for name, deg in self.generators)
        object.__setattr__(self, "generators", gens)
        names = [name for name, _ in gens]
        if len(set(names)) != len(names):
            raise TensorError(f"generator names must be distinct: {names}")
        if any(deg < 1 for _, deg in gens):
            raise TensorError("generator degrees must be positive")

    @classmethod
    def uniform(cls, k: int, degree: int, prefix: str = "v") -> "GradedBasis":
        return cls(tuple((f"{prefix}{i + 1}", degree) for i in range(k)))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def degree(self, i: int) -> int:
        return self.generators[i][1]

    def name(self, i: int) -> str:
        return self.generators[i][0]

    def word_degree(self, word: Word) -> int:
        return sum(self.generators[i][1] for i in word)

    def word_key(self, word: Word) -> Tuple[int, int, Word]:
        return self.word_degree(word), len(word), word

    def single_degree(self) -> Optional[int]:
        degrees = {deg for _, deg in self.generators}
        return degrees.pop() if len(degrees) == 1 else None

    def words_of_degree(self, d: int) -> Tuple[Word, ...]:
        return _words_of_degree(self, d)

    def render_word(self, word: Word) -> str:
        return "1" if not word else "*".join(self.name(i) for i in word)


@lru_cache(maxsize=256)
def _words_of_degree(basis: GradedBasis, d: int) -> Tuple[Word, ...]:
    if d < 0:
        return ()
    if d == 0:
        return ((),)
    words = []
    for i in range(basis.rank):
        deg = basis.degree(i)
        if deg <= d:
            words.extend((i,) + w for w in _words_of_degree(basis, d - deg))
    return tuple(sorted(words, key=basis.word_key))


class TensorElement:
    """Element of T(V) over Z[1/S]; zero coefficients are never stored."""

    __slots__ = ("basis", "ring", "_terms")

    def __init__(
        self,
        basis: GradedBasis,
        terms: Optional[Mapping[Word, Scalar]] = None,
        ring: PrimeSet = INTEGERS,
    ):
        self.basis = basis
        self.ring = ring
        clean: Dict[Word, Fraction] = {}
        for word, coeff in (terms or {}).items():
            value = coeff.value if isinstance(coeff, LocalScalar) else Fraction(coeff)
            if value == 0:
                continue
            if any(i < 0 or i >= basis.rank for i in word):
                raise TensorError(f"word {word} uses an unknown generator")
            clean[tuple(word)] = value
        for value in clean.values():
            LocalScalar(value, ring)
        self._terms = clean

    @classmethod
    def generator(cls, basis: GradedBasis, i: int, ring: PrimeSet = INTEGERS) -> "TensorElement":
        return cls(basis, {(i,): 1}, ring)

    @classmethod
    def one(cls, basis: GradedBasis, ring: PrimeSet = INTEGERS) -> "TensorElement":
        return cls(basis, {(): 1}, ring)

    @classmethod
    def zero(cls, basis: GradedBasis, ring: PrimeSet = INTEGERS) -> "TensorElement":
        return cls(basis, {}, ring)

    def items(self) -> List[Tuple[Word, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: self.basis.word_key(kv[0]))

    def coefficient(self, word: Word) -> Fraction:
        return self._terms.get(tuple(word), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> List[int]:
        return sorted({self.basis.word_degree(w) for w in self._terms})

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> Optional[int]:
        degrees = self.degrees()
        if len(degrees) > 1:
            raise TensorError(f"element is not homogeneous: degrees {degrees}")
        return degrees[0] if degrees else None

    def homogeneous_components(self) -> Dict[int, "TensorElement"]:
        parts: Dict[int, Dict[Word, Fraction]] = {}
        for word, coeff in self._terms.items():
            parts.setdefault(self.basis.word_degree(word), {})[word] = coeff
        return {d: TensorElement(self.basis, t, self.ring) for d, t in sorted(parts.items())}

    def _check(self, other: "TensorElement") -> None:
        if other.basis != self.basis:
            raise TensorError("tensor elements live over different bases")
        if other.ring != self.ring:
            raise TensorError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if not isinstance(other, TensorElement):
            return NotImplemented
        self._check(other)
        terms = dict(self._terms)
        for word, coeff in other._terms.items():
            terms[word] = terms.get(word, Fraction(0)) + coeff
        return TensorElement(self.basis, terms, self.ring)

    def __neg__(self) -> "TensorElement":
        return TensorElement(self.basis, {w: -c for w, c in self._terms.items()}, self.ring)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self + (-other)

    def scale(self, c: Scalar) -> "TensorElement":
        value = c.value if isinstance(c, LocalScalar) else Fraction(c)
        return TensorElement(self.basis, {w: value * v for w, v in self._terms.items()}, self.ring)

    def __mul__(self, other: Union["TensorElement", Scalar]) -> "TensorElement":
        if isinstance(other, TensorElement):
            self._check(other)
            terms: Dict[Word, Fraction] = {}
            for w1, c1 in self._terms.items():
                for w2, c2 in other._terms.items():
                    word = w1 + w2
                    terms[word] = terms.get(word, Fraction(0)) + c1 * c2
            return TensorElement(self.basis, terms, self.ring)
        if isinstance(other, (int, Fraction, LocalScalar)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other: Scalar) -> "TensorElement":
        if isinstance(other, (int, Fraction, LocalScalar)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.basis == other.basis and self.ring == other.ring and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.basis, self.ring, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"TensorElement({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for word, coeff in self.items():
            text = self.basis.render_word(word)
            if coeff == 1:
                parts.append(text)
            elif coeff == -1:
                parts.append(f"-{text}")
            else:
                parts.append(f"{coeff} {text}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_dict(self) -> Dict[str, str]:
        return {" ".join(self.basis.name(i) for i in w): str(c) for w, c in self.items()}

    @classmethod
    def from_dict(
        cls, basis: GradedBasis, data: Mapping[str, str], ring: PrimeSet = INTEGERS
    ) -> "TensorElement":
        index = {basis.name(i): i for i in range(basis.rank)}
        terms = {}
        for key, value in data.items():
            word = tuple(index[name] for name in key.split()) if key.strip() else ()
            terms[word] = Fraction(value)
        return cls(basis, terms, ring)


def bracket(a: TensorElement, b: TensorElement) -> TensorElement:
    """Graded commutator [a, b] = a⊗b - (-1)^{|a||b|} b⊗a on homogeneous parts."""
    if a.basis != b.basis:
        raise TensorError("bracket of elements over different bases")
    result = TensorElement.zero(a.basis, a.ring)
    for p, ap in a.homogeneous_components().items():
        for q, bq in b.homogeneous_components().items():
            sign = -1 if (p * q) % 2 else 1
            result = result + ap * bq - (bq * ap).scale(sign)
    return result


def square(a: TensorElement) -> TensorElement:
    """a⊗a for homogeneous a of odd degree."""
    if a.is_zero():
        return a
    degree = a.degree
    if degree % 2 == 0:
        raise TensorError(f"squaring needs odd degree, got {degree}")
    return a * a


@dataclass(frozen=True)
class QuadraticRelation:
    """ℒ = Σ g_ij v_i⊗v_j."""
    element: TensorElement = field(compare=False)
    form: SymForm

    @classmethod
    def from_form(cls, g: SymForm, basis: GradedBasis, ring: PrimeSet = INTEGERS) -> "QuadraticRelation":
        if g.rank != basis.rank:
            raise TensorError(f"form rank {g.rank} does not match basis rank {basis.rank}")
        terms = {(i, j): g[i, j] for i in range(g.rank) for j in range(g.rank)}
        return cls(TensorElement(basis, terms, ring), g)

    @property
    def basis(self) -> GradedBasis:
        return self.element.basis

    @property
    def ring(self) -> PrimeSet:
        return self.element.ring

    @property
    def degree(self) -> int:
        return self.element.degree


def _require_single_odd_degree(basis: GradedBasis) -> int:
    degree = basis.single_degree()
    if degree is None or degree % 2 == 0:
        raise TensorError("construct_w is only defined for V concentrated in one odd degree")
    return degree


def construct_w(g: SymForm, basis: GradedBasis, ring: PrimeSet = INTEGERS) -> List[TensorElement]:
    """w_i = Σ_{j<k} g_ij [v_j, v_k] + g_ik v_k⊗v_k for i = 1..k-1."""
    _require_single_odd_degree(basis)
    k = g.rank
    if k < 2:
        raise TensorError("construct_w needs rank at least 2")
    if basis.rank != k:
        raise TensorError(f"form rank {k} does not match basis rank {basis.rank}")
    if not is_unit(LocalScalar(g.det(), ring)):
        raise TensorError(f"form determinant {g.det()} is not a unit over S={ring}")

    v = [TensorElement.generator(basis, i, ring) for i in range(k)]
    last = v[k - 1]
    brackets = [bracket(v[j], last) for j in range(k - 1)]
    last_square = square(last)
    ws = []
    for i in range(k - 1):
        w = last_square.scale(g[i, k - 1])
        for j in range(k - 1):
            if g[i, j]:
                w = w + brackets[j].scale(g[i, j])
        ws.append(w)
    return ws


def tensor_identity_residual(ws: Sequence[TensorElement], rel: QuadraticRelation) -> TensorElement:
    """Σ_{i<k} [v_i, w_i] - [ℒ, v_k]; zero for every output of construct_w."""
    basis, ring = rel.basis, rel.ring
    k = basis.rank
    total = bracket(rel.element, TensorElement.generator(basis, k - 1, ring)).scale(-1)
    for i, w in enumerate(ws):
        total = total + bracket(TensorElement.generator(basis, i, ring), w)
    return total


def projection_rows(elements: Sequence[TensorElement], kernel_size: int) -> List[List[Fraction]]:
    """Coordinates of degree-two elements in V⊗V / (V⊗span(v_1..v_kernel_size)).

    The quotient has basis v_j⊗v_t for t >= kernel_size.
    """
    if not elements:
        return []
    k = elements[0].basis.rank
    targets = [(j, t) for j in range(k) for t in range(kernel_size, k)]
    return [[e.coefficient(word) for word in targets] for e in elements]


def projects_to_basis(ws: Sequence[TensorElement], rel: QuadraticRelation) -> bool:
    """Whether ℒ and the w_i map to a basis of V⊗V/(V⊗Ker α), Ker α = span(v_1..v_{k-1})."""
    k = rel.basis.rank
    rows = projection_rows(list(ws) + [rel.element], k - 1)
    return spans_free_module(rows, rel.ring, k)


class IdealWitness(NamedTuple):
    """x = Σ coefficient · m1 ⊗ ℒ ⊗ m2."""
    terms: Tuple[Tuple[Word, Word, Fraction], ...]


def _ideal_columns(rel: QuadraticRelation, degree: int) -> List[Tuple[Word, Word, TensorElement]]:
    basis = rel.basis
    rest = degree - rel.degree
    columns = []
    if rest < 0:
        return columns
    for d1 in range(rest + 1):
        left_words = basis.words_of_degree(d1)
        right_words = basis.words_of_degree(rest - d1)
        for m1 in left_words:
            for m2 in right_words:
                left = TensorElement(basis, {m1: 1}, rel.ring)
                right = TensorElement(basis, {m2: 1}, rel.ring)
                columns.append((m1, m2, left * rel.element * right))
    return columns


def ideal_membership(x: TensorElement, rel: QuadraticRelation, degree: int) -> Optional[IdealWitness]:
    """Witness that x lies in the two-sided ideal (ℒ) in the given degree, or None."""
    if x.basis != rel.basis:
        raise TensorError("element and relation live over different bases")
    if not x.is_zero() and x.degree != degree:
        raise TensorError(f"element is not homogeneous of degree {degree}")
    columns = _ideal_columns(rel, degree)
    if not columns:
        return IdealWitness(()) if x.is_zero() else None
    words = rel.basis.words_of_degree(degree)
    A = [[col.coefficient(w) for _, _, col in columns] for w in words]
    b = [x.coefficient(w) for w in words]
    solution = solve_linear(A, b, rel.ring, ncols=len(columns))
    if solution is None:
        return None
    terms = tuple(
        (m1, m2, s.value) for (m1, m2, _), s in zip(columns, solution) if not s.is_zero()
    )
    return IdealWitness(terms)


def rank_oracle(rel: QuadraticRelation, degree: int) -> int:
    """Rank of the degree-d part of T(V)/(ℒ) by listing words."""
    oracle = config_manager.config.oracle
    basis = rel.basis
    generator_degree = min(basis.degree(i) for i in range(basis.rank))
    if basis.rank > oracle.max_rank:
        raise OracleBoundError(f"rank {basis.rank} exceeds oracle limit {oracle.max_rank}")
    if degree > oracle.degree_factor * generator_degree:
        raise OracleBoundError(
            f"degree {degree} exceeds oracle bound {oracle.degree_factor * generator_degree}"
        )
    words = basis.words_of_degree(degree)
    columns = _ideal_columns(rel, degree)
    if not columns:
        return len(words)
    rows = [[col.coefficient(w) for w in words] for _, _, col in columns]
    return len(words) - matrix_rank(rows, len(words))


def random_homogeneous(
    basis: GradedBasis, degree: int, rng, ring: PrimeSet = INTEGERS, terms: int = 3, bound: int = 3
) -> TensorElement:
    """Random element of one degree, used by property tests and selftest."""
    words = basis.words_of_degree(degree)
    if not words:
        return TensorElement.zero(basis, ring)
    chosen = {rng.choice(words): rng.randint(-bound, bound) for _ in range(terms)}
    return TensorElement(basis, chosen, ring)
