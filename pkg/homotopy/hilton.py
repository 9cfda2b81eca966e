"""Hilton normal forms in pi_*(S^n v ... v S^n) for degrees n, 2n-1 and 3n-2.

Basis slots:

* degree n: ``alpha`` slot per sphere.
* degree 2n-1: ``sphere`` slots (i, middle generator) and ``pair`` slots
  [alpha_i, alpha_j] for i < j.
* degree 3n-2: ``sphere`` slots (i, top generator), ``pair`` slots
  [alpha_i, alpha_j] ∘ (stem generator) for i < j, and ``hall`` slots
  [alpha_a, [alpha_b, alpha_c]] for b < c, a >= b.
"""
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from algebra.ring import INTEGERS, IntMatrix, PrimeSet
from algebra.tensorlie import TensorElement
from core.exceptions import BasisMismatchError, NoApplicableRuleError
from homotopy.expressions import (
    Alpha,
    Bracket,
    Compose,
    Named,
    Scaled,
    Sum,
    WhiteheadExpr,
    expr_degree,
    loop_basis,
    render,
)
from homotopy.tables import SphereTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Slot:
    kind: str
    index: Tuple[int, ...]
    generator: str
    order: int

    @property
    def label(self) -> str:
        if self.kind == "alpha":
            return f"a{self.index[0]}"
        if self.kind == "sphere":
            return f"{self.generator}{self.index[0]}"
        if self.kind == "pair":
            i, j = self.index
            base = f"[a{i}, a{j}]"
            return f"{base} @ {self.generator}" if self.generator else base
        a, b, c = self.index
        return f"[a{a}, [a{b}, a{c}]]"


class HiltonBasis:
    """Ordered slots of one degree for a wedge of k copies of S^n."""

    def __init__(self, table: SphereTable, k: int, degree: int):
        n = table.n
        if degree not in (n, 2 * n - 1, 3 * n - 2):
            raise NoApplicableRuleError(f"no Hilton basis in degree {degree} for n={n}")
        if k < 1:
            raise BasisMismatchError("a wedge needs at least one sphere")
        self.table = table
        self.k = k
        self.degree = degree
        slots: List[Slot] = []
        if degree == n:
            slots = [Slot("alpha", (i,), "", 0) for i in range(1, k + 1)]
        elif degree == 2 * n - 1:
            for i in range(1, k + 1):
                slots += [Slot("sphere", (i,), g, f) for g, f in zip(table.middle.names, table.middle.factors)]
            slots += [Slot("pair", (i, j), "", 0) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
        else:
            for i in range(1, k + 1):
                slots += [Slot("sphere", (i,), g, f) for g, f in zip(table.top.names, table.top.factors)]
            for i in range(1, k + 1):
                for j in range(i + 1, k + 1):
                    slots += [Slot("pair", (i, j), s, f) for s, f in zip(table.stem.names, table.stem.factors)]
            for b in range(1, k + 1):
                for c in range(b + 1, k + 1):
                    slots += [Slot("hall", (a, b, c), "", 0) for a in range(b, k + 1)]
        self.slots: Tuple[Slot, ...] = tuple(slots)
        self._index: Dict[Tuple[str, Tuple[int, ...], str], int] = {
            (s.kind, s.index, s.generator): pos for pos, s in enumerate(self.slots)
        }

    @property
    def key(self) -> Tuple:
        return self.table.key, self.k, self.degree

    def __eq__(self, other: object) -> bool:
        return isinstance(other, HiltonBasis) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(s.order for s in self.slots)

    def position(self, kind: str, index: Tuple[int, ...], generator: str = "") -> int:
        try:
            return self._index[(kind, index, generator)]
        except KeyError as e:
            raise NoApplicableRuleError(f"no slot {kind} {index} {generator} in degree {self.degree}") from e

    def zero(self) -> "HiltonVector":
        return HiltonVector(self, (0,) * len(self))

    def unit(self, kind: str, index: Tuple[int, ...], generator: str = "", c: int = 1) -> "HiltonVector":
        coords = [0] * len(self)
        coords[self.position(kind, index, generator)] = c
        return HiltonVector(self, tuple(coords))

    def sphere_vector(self, i: int, group_coords: Sequence[int]) -> "HiltonVector":
        """Embed coordinates of pi_*(S^n) (middle or top group) on sphere i."""
        names = self.table.middle.names if self.degree == 2 * self.table.n - 1 else self.table.top.names
        coords = [0] * len(self)
        for name, c in zip(names, group_coords):
            if c:
                coords[self.position("sphere", (i,), name)] += c
        return HiltonVector(self, tuple(coords))

    def pair_vector(self, i: int, j: int, stem_coords: Sequence[int]) -> "HiltonVector":
        """[alpha_i, alpha_j] ∘ theta for theta in stem coordinates."""
        lo, hi = min(i, j), max(i, j)
        coords = [0] * len(self)
        for name, c in zip(self.table.stem.names, stem_coords):
            if c:
                coords[self.position("pair", (lo, hi), name)] += c
        return HiltonVector(self, tuple(coords))


@dataclass(frozen=True)
class HiltonVector:
    basis: HiltonBasis
    coords: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != len(self.basis):
            raise BasisMismatchError("coordinate count does not match the basis")
        reduced = tuple(c % f if f else int(c) for c, f in zip(self.coords, self.basis.orders))
        object.__setattr__(self, "coords", reduced)

    def _check(self, other: "HiltonVector") -> None:
        if self.basis != other.basis:
            raise BasisMismatchError(f"vectors over different bases {self.basis.key} and {other.basis.key}")

    def __add__(self, other: "HiltonVector") -> "HiltonVector":
        self._check(other)
        return HiltonVector(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "HiltonVector") -> "HiltonVector":
        self._check(other)
        return HiltonVector(self.basis, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "HiltonVector":
        return HiltonVector(self.basis, tuple(-a for a in self.coords))

    def scale(self, c: int) -> "HiltonVector":
        return HiltonVector(self.basis, tuple(c * a for a in self.coords))

    def __rmul__(self, c: int) -> "HiltonVector":
        return self.scale(c)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def items(self) -> Iterator[Tuple[Slot, int]]:
        for slot, c in zip(self.basis.slots, self.coords):
            if c:
                yield slot, c

    def to_dict(self) -> Dict[str, int]:
        return {slot.label: c for slot, c in self.items()}

    def coefficient(self, kind: str, index: Tuple[int, ...], generator: str = "") -> int:
        return self.coords[self.basis.position(kind, index, generator)]

    def __str__(self) -> str:
        parts = [f"{c}*{s.label}" if c != 1 else s.label for s, c in self.items()]
        return " + ".join(parts) if parts else "0"


@lru_cache(maxsize=64)
def hilton_basis(table: SphereTable, k: int, degree: int) -> HiltonBasis:
    return HiltonBasis(table, k, degree)


def middle_basis(table: SphereTable, k: int) -> HiltonBasis:
    return hilton_basis(table, k, 2 * table.n - 1)


def top_basis(table: SphereTable, k: int) -> HiltonBasis:
    return hilton_basis(table, k, 3 * table.n - 2)


# Product rules ------------------------------------------------------------------

def _hall(top: HiltonBasis, a: int, b: int, c: int) -> HiltonVector:
    """[alpha_a, [alpha_b, alpha_c]] for b != c, straightened by antisymmetry and Jacobi."""
    lo, hi = min(b, c), max(b, c)
    if a >= lo:
        return top.unit("hall", (a, lo, hi))
    # a < lo < hi
    return -(top.unit("hall", (hi, a, lo)) + top.unit("hall", (lo, a, hi)))


def bracket_alpha_slot(table: SphereTable, k: int, a: int, slot: Slot) -> HiltonVector:
    """[alpha_a, s] for a basis slot s of degree 2n-1."""
    top = top_basis(table, k)
    if slot.kind == "pair":
        i, j = slot.index
        return _hall(top, a, i, j)
    i = slot.index[0]
    gen = slot.generator
    if a == i:
        return top.sphere_vector(i, table.brackets[gen])
    # [alpha_a, gamma_i] = [alpha_a, alpha_i] ∘ E(gamma) - H(gamma) [alpha_i, [alpha_i, alpha_a]]
    out = top.pair_vector(a, i, table.suspension[gen])
    h = table.hopf[gen]
    if h:
        out = out - _hall(top, i, i, a).scale(h)
    return out


def bracket_alpha(table: SphereTable, a: int, v: HiltonVector) -> HiltonVector:
    """[alpha_a, v] for v of degree 2n-1."""
    out = top_basis(table, v.basis.k).zero()
    for slot, c in v.items():
        out = out + bracket_alpha_slot(table, v.basis.k, a, slot).scale(c)
    return out


def bracket_degree_n(table: SphereTable, x: HiltonVector, y: HiltonVector) -> HiltonVector:
    """[x, y] for x, y of degree n, in degree 2n-1."""
    mid = middle_basis(table, x.basis.k)
    out = mid.zero()
    for sx, cx in x.items():
        for sy, cy in y.items():
            a, b = sx.index[0], sy.index[0]
            if a == b:
                out = out + mid.sphere_vector(a, table.whitehead_square).scale(cx * cy)
            else:
                out = out + mid.unit("pair", (min(a, b), max(a, b))).scale(cx * cy)
    return out


def bracket_mixed(table: SphereTable, x: HiltonVector, v: HiltonVector) -> HiltonVector:
    """[x, v] for x of degree n and v of degree 2n-1."""
    out = top_basis(table, x.basis.k).zero()
    for slot, c in x.items():
        out = out + bracket_alpha(table, slot.index[0], v).scale(c)
    return out


def compose_degree_n(table: SphereTable, x: HiltonVector, gamma: str) -> HiltonVector:
    """x ∘ gamma for gamma a middle generator, with the Hopf correction

    (Σ c_a alpha_a) ∘ gamma = Σ c_a gamma_a + Σ C(c_a, 2) H(gamma) [alpha_a, alpha_a]
                               + Σ_{a<b} c_a c_b H(gamma) [alpha_a, alpha_b].
    """
    if gamma not in table.hopf:
        raise NoApplicableRuleError(f"{gamma} is not a generator of pi_{table.middle_degree}(S^{table.n})")
    mid = middle_basis(table, x.basis.k)
    h = table.hopf[gamma]
    terms = [(slot.index[0], c) for slot, c in x.items()]
    out = mid.zero()
    for a, c in terms:
        out = out + mid.unit("sphere", (a,), gamma, c)
        if h:
            out = out + mid.sphere_vector(a, table.whitehead_square).scale(comb_signed(c) * h)
    if h:
        for p, (a, ca) in enumerate(terms):
            for b, cb in terms[p + 1:]:
                out = out + mid.unit("pair", (min(a, b), max(a, b))).scale(ca * cb * h)
    return out


def comb_signed(c: int) -> int:
    """C(c, 2) = c(c-1)/2, valid for negative c."""
    return comb(c, 2) if c >= 0 else c * (c - 1) // 2


def compose_middle(table: SphereTable, v: HiltonVector, klass: str) -> HiltonVector:
    """v ∘ theta for v of degree 2n-1 and theta a named stem class."""
    theta = table.class_coords(klass)
    top = top_basis(table, v.basis.k)
    out = top.zero()
    for slot, c in v.items():
        if slot.kind == "sphere":
            out = out + top.sphere_vector(slot.index[0], table.compose(slot.generator, theta)).scale(c)
        else:
            i, j = slot.index
            out = out + top.pair_vector(i, j, theta).scale(c)
    return out


# Normalization ------------------------------------------------------------------

def _is_square(e: WhiteheadExpr) -> Optional[int]:
    if isinstance(e, Bracket) and isinstance(e.left, Alpha) and isinstance(e.right, Alpha):
        if e.left.index == e.right.index:
            return e.left.index
    return None


class _Normalizer:
    def __init__(self, table: SphereTable, k: int, rng: Optional[random.Random]):
        self.table = table
        self.k = k
        self.rng = rng
        self.n = table.n

    def degree(self, e: WhiteheadExpr) -> int:
        return expr_degree(e, self.n, self.table.middle.names, self.table.top.names)

    def value(self, e: WhiteheadExpr) -> HiltonVector:
        t, k, n = self.table, self.k, self.n
        if isinstance(e, Alpha):
            if not 1 <= e.index <= k:
                raise NoApplicableRuleError(f"alpha index {e.index} outside 1..{k}", render(e))
            return hilton_basis(t, k, n).unit("alpha", (e.index,))
        if isinstance(e, Named):
            if not 1 <= e.index <= k:
                raise NoApplicableRuleError(f"sphere index {e.index} outside 1..{k}", render(e))
            if e.name in t.middle.names:
                return middle_basis(t, k).unit("sphere", (e.index,), e.name)
            if e.name in t.top.names:
                return top_basis(t, k).unit("sphere", (e.index,), e.name)
            raise NoApplicableRuleError(f"table {t.name} has no class {e.name}", render(e))
        if isinstance(e, Scaled):
            if e.coefficient.denominator != 1:
                raise NoApplicableRuleError("integral tables need integer coefficients", render(e))
            return self.value(e.expr).scale(int(e.coefficient))
        if isinstance(e, Sum):
            terms = list(e.terms)
            if self.rng is not None:
                self.rng.shuffle(terms)
            out = hilton_basis(t, k, self.degree(e)).zero()
            for term in terms:
                out = out + self.value(term)
            return out
        if isinstance(e, Bracket):
            return self.bracket(e)
        if isinstance(e, Compose):
            return self.compose(e)
        raise TypeError(f"not an expression: {e!r}")

    def bracket(self, e: Bracket) -> HiltonVector:
        n = self.n
        dl, dr = self.degree(e.left), self.degree(e.right)
        if dl == n and dr == n:
            return bracket_degree_n(self.table, self.value(e.left), self.value(e.right))
        if {dl, dr} == {n, 2 * n - 1}:
            x, v = (e.left, e.right) if dl == n else (e.right, e.left)
            routed = self._square_route(x, v)
            if routed is not None:
                return routed
            return bracket_mixed(self.table, self.value(x), self.value(v))
        raise NoApplicableRuleError(f"no bracket rule in degrees {dl} and {dr}", render(e))

    def _square_route(self, x: WhiteheadExpr, v: WhiteheadExpr) -> Optional[HiltonVector]:
        """[alpha_j, [alpha_i, alpha_i]] straight from the triple-product rules, chosen at random."""
        i = _is_square(v)
        if self.rng is None or i is None or not isinstance(x, Alpha) or self.rng.random() < 0.5:
            return None
        j = x.index
        top = top_basis(self.table, self.k)
        if i == j:
            return top.sphere_vector(i, self.table.triple)
        return _hall(top, i, i, j).scale(-2)

    def compose(self, e: Compose) -> HiltonVector:
        n = self.n
        inner_degree = self.degree(e.expr)
        if inner_degree == n:
            return compose_degree_n(self.table, self.value(e.expr), e.klass)
        if inner_degree == 2 * n - 1:
            if e.klass not in self.table.classes:
                raise NoApplicableRuleError(f"no composition rule for {e.klass}", render(e))
            if isinstance(e.expr, Sum) and self.rng is not None and self.rng.random() < 0.5:
                out = top_basis(self.table, self.k).zero()
                for term in e.expr.terms:
                    out = out + compose_middle(self.table, self.value(term), e.klass)
                return out
            return compose_middle(self.table, self.value(e.expr), e.klass)
        raise NoApplicableRuleError(f"no composition out of degree {inner_degree}", render(e))


def normalize(
    e: WhiteheadExpr, table: SphereTable, k: int, rng: Optional[random.Random] = None
) -> HiltonVector:
    """Hilton coordinates of e; ``rng`` randomizes the order rules are applied in."""
    return _Normalizer(table, k, rng).value(e)


# Basis substitution and loop images -------------------------------------------------

def substitute(v: HiltonVector, Q: IntMatrix) -> HiltonVector:
    """Rewrite a degree-(2n-1) vector under alpha_i = Σ_a Q[a][i] alpha'_a.

    Q has shape (k', k) for a source wedge of k spheres and a target of k'.
    """
    table = v.basis.table
    if v.basis.degree != 2 * table.n - 1:
        raise NoApplicableRuleError("substitution is only defined in degree 2n-1")
    if Q.cols != v.basis.k:
        raise BasisMismatchError(f"substitution has {Q.cols} columns for a wedge of {v.basis.k}")
    k_new = Q.rows
    deg_n = hilton_basis(table, k_new, table.n)
    images = [HiltonVector(deg_n, Q.column(i)) for i in range(v.basis.k)]
    out = middle_basis(table, k_new).zero()
    for slot, c in v.items():
        if slot.kind == "sphere":
            out = out + compose_degree_n(table, images[slot.index[0] - 1], slot.generator).scale(c)
        else:
            i, j = slot.index
            out = out + bracket_degree_n(table, images[i - 1], images[j - 1]).scale(c)
    return out


def rho_vector(v: HiltonVector, ring: PrimeSet = INTEGERS) -> TensorElement:
    """Loop homology image of a degree-(2n-1) vector; torsion slots go to zero."""
    table = v.basis.table
    if v.basis.degree != 2 * table.n - 1:
        raise NoApplicableRuleError("loop images are only taken in degree 2n-1")
    basis = loop_basis(v.basis.k, table.n)
    terms: Dict[Tuple[int, ...], int] = {}
    for slot, c in v.items():
        if slot.order:
            continue
        if slot.kind == "sphere":
            i = slot.index[0] - 1
            terms[(i, i)] = terms.get((i, i), 0) - c * table.hopf[slot.generator]
        else:
            i, j = (x - 1 for x in slot.index)
            terms[(i, j)] = terms.get((i, j), 0) - c
            terms[(j, i)] = terms.get((j, i), 0) - c
    return TensorElement(basis, terms, ring)


def attaching_vector(
    table: SphereTable, g: Sequence[Sequence[int]], torsion: Optional[Sequence[int]] = None
) -> HiltonVector:
    """L = Σ_{i<j} g_ij [alpha_i, alpha_j] + Σ g_ii phi_i + Σ l_i psi_i.

    phi is the Hopf invariant one class and psi the torsion generator of the table.
    """
    k = len(g)
    mid = middle_basis(table, k)
    out = mid.zero()
    phi = table.hopf_class
    for i in range(k):
        out = out + mid.unit("sphere", (i + 1,), phi, g[i][i])
        for j in range(i + 1, k):
            out = out + mid.unit("pair", (i + 1, j + 1), "", g[i][j])
    if torsion:
        psi = table.torsion_class
        if psi is None:
            if any(torsion):
                raise NoApplicableRuleError(f"table {table.name} has no torsion class for the l_i")
        else:
            for i, l in enumerate(torsion):
                out = out + mid.unit("sphere", (i + 1,), psi, l)
    return out


def vector_expression(v: HiltonVector) -> WhiteheadExpr:
    """An expression normalizing to a degree-n or degree-(2n-1) vector."""
    terms: List[WhiteheadExpr] = []
    for slot, c in v.items():
        if slot.kind == "alpha":
            atom: WhiteheadExpr = Alpha(slot.index[0])
        elif slot.kind == "sphere":
            atom = Named(slot.generator, slot.index[0])
        elif slot.kind == "pair" and not slot.generator:
            atom = Bracket(Alpha(slot.index[0]), Alpha(slot.index[1]))
        else:
            raise NoApplicableRuleError(f"no expression for slot {slot.label}")
        terms.append(atom if c == 1 else Scaled(Fraction(c), atom))
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def torsion_coefficients(v: HiltonVector) -> List[int]:
    """Coefficients of the torsion generator on each sphere (l_i)."""
    psi = v.basis.table.torsion_class
    if psi is None:
        return [0] * v.basis.k
    return [v.coefficient("sphere", (i,), psi) for i in range(1, v.basis.k + 1)]


def form_from_vector(v: HiltonVector) -> List[List[int]]:
    """Read g back from the pair and Hopf-class coordinates of L."""
    k = v.basis.k
    phi = v.basis.table.hopf_class
    g = [[0] * k for _ in range(k)]
    for i in range(1, k + 1):
        g[i - 1][i - 1] = v.coefficient("sphere", (i,), phi)
        for j in range(i + 1, k + 1):
            g[i - 1][j - 1] = g[j - 1][i - 1] = v.coefficient("pair", (i, j))
    return g
