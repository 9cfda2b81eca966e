"""Kernel subgroups of pi_{3n-2}(wedge) -> pi_{3n-2}(M) and bounded searches over them.

``kernel_subgroup`` only spans the classes [L, alpha_i] and L ∘ theta; membership
certifies that a class dies in M, not that it is outside the true kernel.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

from algebra.forms import is_primitive, iter_small_vectors
from algebra.ring import IntMatrix, SmithForm, integer_kernel, lattice_basis, smith_normal_form
from core.config import config_manager
from core.exceptions import BasisMismatchError, NoApplicableRuleError
from core.interfaces import SearchFamily
from homotopy.expressions import WhiteheadExpr, render
from homotopy.hilton import (
    HiltonBasis,
    HiltonVector,
    bracket_alpha,
    bracket_mixed,
    compose_middle,
    hilton_basis,
    middle_basis,
    normalize,
    rho_vector,
    substitute,
    top_basis,
    vector_expression,
)
from homotopy.tables import SphereTable
from util.performance import monitor_performance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelWitness:
    """v = Σ coefficients[i] · generators[i] modulo the slot orders."""
    coefficients: Tuple[int, ...]
    labels: Tuple[str, ...]

    def to_dict(self) -> Dict[str, int]:
        return {label: c for label, c in zip(self.labels, self.coefficients) if c}


@dataclass(frozen=True, eq=False)
class KernelSubgroup:
    """Generators of a subgroup of a degree-(3n-2) Hilton group."""
    basis: HiltonBasis
    generators: Tuple[HiltonVector, ...]
    labels: Tuple[str, ...]

    def _matrix(self) -> Tuple[IntMatrix, int]:
        columns = [list(v.coords) for v in self.generators]
        for pos, order in enumerate(self.basis.orders):
            if order:
                column = [0] * len(self.basis)
                column[pos] = order
                columns.append(column)
        if not columns:
            columns = [[0] * len(self.basis)]
        return IntMatrix.from_columns(columns, nrows=len(self.basis)), len(columns)

    @cached_property
    def _smith(self) -> Tuple[SmithForm, int]:
        M, ncols = self._matrix()
        return smith_normal_form(M), ncols

    def contains(self, coords: Sequence[int]) -> bool:
        return self.solve(coords) is not None

    def solve(self, coords: Sequence[int]) -> Optional[Tuple[int, ...]]:
        """Integer coefficients on the generator columns, or None."""
        snf, ncols = self._smith
        c = snf.U.apply(coords)
        y = [0] * ncols
        for i, ci in enumerate(c):
            d = snf.D[i, i] if i < ncols else 0
            if d == 0:
                if ci:
                    return None
                continue
            if ci % d:
                return None
            y[i] = ci // d
        x = snf.V.apply(y)
        return tuple(x[: len(self.generators)])

    def congruence_rows(self) -> List[Tuple[Tuple[int, ...], int]]:
        """Pairs (row, modulus) with v in the subgroup iff row·v ≡ 0 mod modulus for all pairs.

        Modulus 0 means the row must vanish exactly.
        """
        snf, ncols = self._smith
        rows = []
        for i in range(len(self.basis)):
            d = snf.D[i, i] if i < ncols else 0
            if d != 1:
                rows.append((snf.U.row(i), d))
        return rows


def _as_vector(L: Union[WhiteheadExpr, HiltonVector], table: SphereTable, k: int) -> HiltonVector:
    if isinstance(L, HiltonVector):
        if L.basis != middle_basis(table, k):
            raise BasisMismatchError("attaching map is not a degree-(2n-1) vector over this table")
        return L
    v = normalize(L, table, k)
    if v.basis.degree != table.middle_degree:
        raise NoApplicableRuleError(f"L must have degree {table.middle_degree}", render(L))
    return v


def kernel_subgroup(L: Union[WhiteheadExpr, HiltonVector], table: SphereTable, k: int) -> KernelSubgroup:
    """Span of [L, alpha_i] for every i and L ∘ theta for every stem generator theta."""
    v = _as_vector(L, table, k)
    gens: List[HiltonVector] = []
    labels: List[str] = []
    for i in range(1, k + 1):
        gens.append(bracket_alpha(table, i, v))
        labels.append(f"[L, a{i}]")
    for theta in table.stem.names:
        gens.append(compose_middle(table, v, theta))
        labels.append(f"L @ {theta}")
    return KernelSubgroup(top_basis(table, k), tuple(gens), tuple(labels))


def in_kernel(v: HiltonVector, K: KernelSubgroup) -> Optional[KernelWitness]:
    """Integer witness that v lies in K modulo slot orders, or None."""
    if v.basis != K.basis:
        raise BasisMismatchError(f"vector basis {v.basis.key} differs from subgroup basis {K.basis.key}")
    solution = K.solve(v.coords)
    if solution is None:
        return None
    return KernelWitness(solution, K.labels)


# Bounded search --------------------------------------------------------------------

@dataclass(frozen=True)
class SearchSolution:
    mu: Tuple[int, ...]
    delta: Dict[str, int]
    delta_expression: str
    witness: Dict[str, int]


@dataclass
class SearchReport:
    table: str
    variant: Optional[str]
    family: SearchFamily
    bound: int
    solutions: List[SearchSolution] = field(default_factory=list)
    examined_mu: int = 0
    obstructed_mu: int = 0
    truncated: bool = False

    @property
    def empty(self) -> bool:
        return not self.solutions

    def summary(self) -> str:
        variant = f" variant {self.variant}" if self.variant else ""
        state = "truncated" if self.truncated else "exhaustive"
        return (
            f"{self.table}{variant} family={self.family.value} bound={self.bound}: "
            f"{len(self.solutions)} solution(s), {self.examined_mu} mu examined, "
            f"{self.obstructed_mu} excluded for every delta ({state})"
        )


def _det3(rows: Sequence[Sequence[int]]) -> int:
    return IntMatrix.from_rows(rows, 3).det()


def _cofactors(rows: Sequence[Sequence[int]]) -> List[int]:
    """Coefficients c with det(rows + [x]) = c·x for a 3x4 block of rows."""
    out = []
    for j in range(4):
        minor = [[r[t] for t in range(4) if t != j] for r in rows]
        out.append((-1) ** (3 + j) * _det3(minor))
    return out


def _word_vector(e) -> List[int]:
    words = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return [int(e.coefficient(w)) for w in words]


def _delta_slots(table: SphereTable, family: SearchFamily) -> List[Tuple[int, int]]:
    """Positions of the middle basis (k=2) that delta may use, with their orders."""
    mid = middle_basis(table, 2)
    return [
        (pos, slot.order)
        for pos, slot in enumerate(mid.slots)
        if slot.kind == "sphere" or family is SearchFamily.FULL
    ]


def _coefficient_range(order: int, bound: int) -> List[int]:
    values = list(range(-bound, bound + 1))
    if order:
        seen = set()
        kept = []
        for c in sorted(values, key=lambda x: (abs(x), -x)):
            if c % order not in seen:
                seen.add(c % order)
                kept.append(c)
        values = sorted(kept)
    return values


@monitor_performance("bounded_search")
def bounded_search(
    table: SphereTable,
    L: Union[WhiteheadExpr, HiltonVector],
    bound: Optional[int] = None,
    family: SearchFamily = SearchFamily.FULL,
    max_solutions: Optional[int] = None,
) -> SearchReport:
    """All (mu_1, delta_1) for k = 2 with coefficients in [-bound, bound].

    A pair qualifies when mu is primitive, [mu, delta] lies in the kernel
    subgroup of L and the loop homology matrix (rho L; mu⊗a_1; mu⊗a_2; rho delta)
    is invertible over Z. mu is taken up to sign. For each mu the lattice of
    deltas with [mu, delta] in the subgroup is computed first; when the
    determinant takes no value ±1 on it, mu is excluded for every delta.
    """
    search = config_manager.config.search
    bound = search.kernel_search_bound if bound is None else bound
    if bound < 0 or bound > search.max_search_bound:
        raise ValueError(f"bound must lie in 0..{search.max_search_bound}, got {bound}")
    k = 2
    v = _as_vector(L, table, k)
    K = kernel_subgroup(v, table, k)
    mid = middle_basis(table, k)
    deg_n = hilton_basis(table, k, table.n)
    report = SearchReport(table.name, table.variant, family, bound)
    slots = _delta_slots(table, family)
    units = [mid.unit(s.kind, s.index, s.generator) for s in mid.slots]
    rho_units = [_word_vector(rho_vector(u)) for u in units]
    rho_L = _word_vector(rho_vector(v))
    congruences = K.congruence_rows()

    for mu in iter_small_vectors(k, bound):
        if not is_primitive(mu) or next(c for c in mu if c) < 0:
            continue
        report.examined_mu += 1
        mu_vec = HiltonVector(deg_n, mu)
        images = [bracket_mixed(table, mu_vec, units[pos]).coords for pos, _ in slots]
        r = _cofactors([rho_L, [mu[0], 0, mu[1], 0], [0, mu[0], 0, mu[1]]])
        weights = [sum(a * b for a, b in zip(r, rho_units[pos])) for pos, _ in slots]

        lattice = _delta_lattice(images, congruences, len(slots))
        reachable = [sum(w * x for w, x in zip(weights, b)) for b in lattice]
        if not reachable or math.gcd(*reachable) != 1:
            report.obstructed_mu += 1
            continue

        ranges = [_coefficient_range(order, bound) for _, order in slots]
        for coeffs in _box(ranges):
            if sum(w * c for w, c in zip(weights, coeffs)) not in (1, -1):
                continue
            image = [sum(c * img[t] for c, img in zip(coeffs, images)) for t in range(len(K.basis))]
            witness = K.solve(image)
            if witness is None:
                continue
            delta = mid.zero()
            for (pos, _), c in zip(slots, coeffs):
                delta = delta + units[pos].scale(c)
            report.solutions.append(SearchSolution(
                mu=tuple(mu),
                delta=delta.to_dict(),
                delta_expression=render(vector_expression(delta)) if not delta.is_zero() else "0",
                witness=KernelWitness(witness, K.labels).to_dict(),
            ))
            if max_solutions is not None and len(report.solutions) >= max_solutions:
                report.truncated = True
                logger.info(report.summary())
                return report
    logger.info(report.summary())
    return report


def _box(ranges: Sequence[Sequence[int]]):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _box(ranges[1:]):
            yield (head,) + tail


def _delta_lattice(
    images: Sequence[Sequence[int]], congruences: Sequence[Tuple[Sequence[int], int]], m: int
) -> List[Tuple[int, ...]]:
    """Basis of {c in Z^m : Σ c_s images[s] lies in the subgroup}."""
    if not congruences:
        return [tuple(int(i == j) for j in range(m)) for i in range(m)]
    rows = []
    moduli = []
    for row, d in congruences:
        rows.append([sum(a * b for a, b in zip(row, img)) for img in images])
        moduli.append(d)
    # c and slack t with rows·c - d·t = 0
    extra = [d for d in moduli if d]
    width = m + len(extra)
    matrix = []
    slack = 0
    for row, d in zip(rows, moduli):
        full = list(row) + [0] * len(extra)
        if d:
            full[m + slack] = -d
            slack += 1
        matrix.append(full)
    kernel = integer_kernel(IntMatrix.from_rows(matrix, width))
    return lattice_basis([vec[:m] for vec in kernel], m)


# Principal bundle scan --------------------------------------------------------------

@dataclass
class PrincipalScan:
    modulus: int
    bound: int
    solutions: List[Tuple[int, ...]]
    examined: int


def principal_map_scan(
    table: SphereTable, L: Union[WhiteheadExpr, HiltonVector], k: int, bound: Optional[int] = None
) -> PrincipalScan:
    """Primitive (n_1..n_k) whose pinch-and-multiply image of L vanishes in the classifying space.

    The image of L under alpha_i -> n_i iota is read through the table's
    classifying homomorphism pi_{2n-1}(S^n) -> Z/modulus.
    """
    if table.classifying_modulus is None:
        raise NoApplicableRuleError(f"table {table.name} has no classifying data")
    bound = config_manager.config.search.kernel_search_bound if bound is None else bound
    v = _as_vector(L, table, k)
    modulus = table.classifying_modulus
    solutions: List[Tuple[int, ...]] = []
    examined = 0
    for ns in iter_small_vectors(k, bound):
        if not is_primitive(ns) or next(c for c in ns if c) < 0:
            continue
        examined += 1
        image = substitute(v, IntMatrix.from_rows([list(ns)], k))
        total = sum(c * table.classifying_images.get(slot.generator, 0) for slot, c in image.items())
        if total % modulus == 0:
            solutions.append(tuple(ns))
    return PrincipalScan(modulus, bound, solutions, examined)
