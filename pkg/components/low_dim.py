"""Integral constructions for n = 2 and n = 4 with the shipped homotopy tables."""
import logging
import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from algebra.forms import (
    BasisChange,
    SymForm,
    characteristic_basis,
    characteristic_vector,
    extend_to_basis,
    is_primitive,
    iter_small_vectors,
    search_vector,
)
from algebra.ring import INTEGERS, IntMatrix, integer_kernel, lattice_basis
from core.config import config_manager
from core.exceptions import ConstructionError, ProblemInputError
from core.interfaces import Regime
from homotopy.expressions import (
    Alpha,
    Bracket,
    Named,
    Sum,
    WhiteheadExpr,
    linear,
    pair,
    parse,
    render,
    scaled,
    total,
)
from homotopy.hilton import (
    HiltonVector,
    attaching_vector,
    bracket_alpha,
    compose_middle,
    form_from_vector,
    hilton_basis,
    normalize,
    rho_vector,
    substitute,
    torsion_coefficients,
    vector_expression,
)
from homotopy.kernel import in_kernel, kernel_subgroup
from homotopy.tables import SphereTable, integral_table
from services.models import FibrationCertificate, ProblemFile
from components.base import BasePipeline, BetaSystem
from util.performance import monitor_performance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvenRankTwoRow:
    """One residue class of (l_1, l_2) for the hyperbolic plane at n = 4."""
    l1: Tuple[int, int]
    l2: Tuple[int, int]
    mu: Tuple[int, int]
    delta: Dict[str, int]

    def matches(self, l1: int, l2: int) -> bool:
        return l1 % self.l1[1] == self.l1[0] and l2 % self.l2[1] == self.l2[0]

    def delta_expression(self) -> WhiteheadExpr:
        return linear({parse(name): c for name, c in self.delta.items()})


EVEN_RANK_TWO_ROWS: Tuple[EvenRankTwoRow, ...] = (
    EvenRankTwoRow((0, 6), (0, 3), (0, 1), {"nu1": 1}),
    EvenRankTwoRow((3, 6), (0, 3), (6, 1), {"nu1": 1}),
    EvenRankTwoRow((0, 6), (2, 3), (4, 1), {"nu1": 63, "nu2": 4}),
    EvenRankTwoRow((3, 6), (2, 3), (10, 1), {"nu1": 399, "nu2": 4}),
    EvenRankTwoRow((1, 6), (1, 3), (2, 1), {"nu1": 175, "nu2": 44}),
    EvenRankTwoRow((4, 6), (4, 6), (8, 1), {"nu1": 257, "nu2": 4}),
    EvenRankTwoRow((1, 6), (2, 3), (10, 1), {"nu1": 401, "nu2": 4, "nup1": -1}),
    EvenRankTwoRow((4, 6), (2, 3), (4, 1), {"nu1": 127, "nu2": 8, "nup1": 1}),
)

# identity, swap, negate, swap and negate; each preserves the hyperbolic form
HYPERBOLIC_SYMMETRIES: Tuple[Tuple[str, Tuple[Tuple[int, int], Tuple[int, int]]], ...] = (
    ("identity", ((1, 0), (0, 1))),
    ("swap", ((0, 1), (1, 0))),
    ("negate", ((-1, 0), (0, -1))),
    ("swap-negate", ((0, -1), (-1, 0))),
)


@dataclass
class Transported:
    """The attaching map after a basis change, with g' and l' read back from it."""
    change: BasisChange
    vector: HiltonVector
    form: SymForm
    torsion: List[int]


def transport(L: HiltonVector, change: BasisChange) -> Transported:
    moved = substitute(L, change.substitution())
    return Transported(change, moved, SymForm.from_rows(form_from_vector(moved)), torsion_coefficients(moved))


ODD_RESIDUE_SCAN_LIMIT = 1296


def last_sphere_image(L: HiltonVector, b: Sequence[int]) -> HiltonVector:
    """Part of L on the sphere alpha'_k once b is the last basis vector."""
    return substitute(L, IntMatrix.from_rows([list(b)], len(b)))


def alpha_expression(mu: Sequence[int]) -> WhiteheadExpr:
    return linear({Alpha(i + 1): c for i, c in enumerate(mu) if c})


def identity_sum(betas: Sequence[WhiteheadExpr]) -> WhiteheadExpr:
    """Σ_i [a_i, beta_i]."""
    return Sum(tuple(Bracket(Alpha(i + 1), b) for i, b in enumerate(betas)))


class IntegralPipeline(BasePipeline):
    """Shared steps of the table-driven regimes."""

    n: int = 0

    def table(self) -> SphereTable:
        return integral_table(self.n)

    def attaching(self, problem: ProblemFile, table: SphereTable) -> HiltonVector:
        g = problem.form().require_unimodular()
        torsion = problem.torsion if problem.torsion is not None else [0] * problem.k
        return attaching_vector(table, g.tolist(), torsion)

    def _finish(
        self,
        problem: ProblemFile,
        table: SphereTable,
        moved: Transported,
        betas: List[WhiteheadExpr],
        construction: str,
        target: str,
        correction: HiltonVector,
        congruences: Dict[str, bool],
        transcript: List[str],
    ) -> FibrationCertificate:
        """Normalize Σ[a_i, beta_i], compare with the target and test kernel membership.

        ``correction`` is the target side of the identity; the residual is
        Σ[a_i, beta_i] - correction.
        """
        k = problem.k
        total_vector = normalize(identity_sum(betas), table, k)
        residual = total_vector - correction
        K = kernel_subgroup(moved.vector, table, k)
        witness = in_kernel(total_vector, K)
        normalized = [normalize(b, table, k) for b in betas]
        system = BetaSystem(
            expressions=betas,
            regime=self.regime,
            construction=construction,
            rho=[rho_vector(v) for v in normalized],
            coordinates=[v.to_dict() for v in normalized],
        )
        if not residual.is_zero():
            transcript.append(f"residual {residual}")
        return self._assemble(
            problem,
            INTEGERS,
            moved.change,
            moved.form,
            attaching_map=str(moved.vector),
            betas=system,
            target=target,
            torsion_after=moved.torsion if table.torsion_class else None,
            congruences=congruences,
            residual=residual.to_dict(),
            kernel_witness=witness.to_dict() if witness else None,
            kernel_member=witness is not None,
            table=table,
            transcript=transcript,
        )

    def certify_pair(
        self,
        problem: ProblemFile,
        mu: Sequence[int],
        delta: WhiteheadExpr,
        change: Optional[BasisChange] = None,
        transcript: Optional[List[str]] = None,
        construction: str = "pair",
    ) -> FibrationCertificate:
        """
        Check a (mu_1, delta_1) for k = 2 against the kernel subgroup and both hypotheses.

        Args:
            problem: Problem with k = 2
            mu: mu_1 in the (possibly changed) alpha basis
            delta: delta_1 of degree 2n-1 in the same basis
            change: Basis change already applied to L

        Returns:
            FibrationCertificate
        """
        if problem.k != 2:
            raise ProblemInputError("pair certification needs k = 2", ["k"])
        table = self.table()
        L = self.attaching(problem, table)
        moved = transport(L, change or BasisChange.identity(2))
        mu_vector = HiltonVector(hilton_basis(table, 2, table.n), tuple(mu))
        product = normalize(Bracket(vector_expression(mu_vector), delta), table, 2)
        K = kernel_subgroup(moved.vector, table, 2)
        witness = in_kernel(product, K)
        delta_vector = normalize(delta, table, 2)
        system = BetaSystem(
            expressions=[delta],
            regime=self.regime,
            construction=construction,
            rho=[rho_vector(delta_vector)],
            coordinates=[delta_vector.to_dict()],
        )
        return self._assemble(
            problem,
            INTEGERS,
            moved.change,
            moved.form,
            attaching_map=str(moved.vector),
            betas=system,
            target=f"[{render(alpha_expression(mu))}, delta_1] lies in the span of [L, a_i] and L @ theta",
            mus=[list(mu)],
            torsion_after=moved.torsion if table.torsion_class else None,
            residual=None,
            kernel_witness=witness.to_dict() if witness else None,
            kernel_member=witness is not None,
            table=table,
            transcript=transcript or [],
        )

    def _pair_from_problem(self, problem: ProblemFile) -> FibrationCertificate:
        return self.certify_pair(problem, problem.pair.mu, parse(problem.pair.delta))


class N2Pipeline(IntegralPipeline):
    """Principal S^1-fibrations over simply connected 4-manifolds."""

    regime = Regime.N2
    n = 2

    @monitor_performance("construct_n2")
    def construct(self, problem: ProblemFile) -> FibrationCertificate:
        if problem.n != 2:
            raise ProblemInputError(f"the n2 pipeline needs n = 2, got {problem.n}", ["n"])
        if problem.pair is not None:
            return self._pair_from_problem(problem)
        table = self.table()
        k = problem.k
        L = self.attaching(problem, table)
        transcript: List[str] = []
        g = problem.form()
        if g.is_even():
            moved = transport(L, BasisChange.identity(k))
            betas = even_form_betas(moved.form, table.hopf_class)
            correction = compose_middle(table, moved.vector, "eta3") - bracket_alpha(table, k, moved.vector)
            construction, target = "beta4", f"sum [a_i, beta_i] = -[L, a{k}] + L @ eta3"
            transcript.append("even form: given basis")
        else:
            char = characteristic_basis(g)
            moved = transport(L, char.change)
            betas = simple_betas(moved.form, table.hopf_class)
            correction = -bracket_alpha(table, k, moved.vector)
            construction, target = "betasimple", f"sum [a_i, beta_i] = -[L, a{k}]"
            transcript.append(f"odd form: characteristic vector {char.vector}")
        congruences = {"last vector characteristic": _last_characteristic(moved.form)}
        return self._finish(problem, table, moved, betas, construction, target, correction, congruences, transcript)


def _last_characteristic(g: SymForm) -> bool:
    k = g.rank
    return all((g[i, i] - g[i, k - 1]) % 2 == 0 for i in range(k - 1))


def even_form_betas(g: SymForm, phi: str) -> List[WhiteheadExpr]:
    """beta_i = Σ_{j<k} g_ij [a_j,a_k] + Σ_{j<i} g_ij [a_i,a_j] + Σ_{i<j<=k} g_ij phi_j."""
    k = g.rank
    betas = []
    for i in range(k - 1):
        terms = [scaled(g[i, j], pair(j + 1, k)) for j in range(k - 1) if g[i, j]]
        terms += [scaled(g[i, j], pair(i + 1, j + 1)) for j in range(i) if g[i, j]]
        terms += [scaled(g[i, j], Named(phi, j + 1)) for j in range(i + 1, k) if g[i, j]]
        betas.append(total(terms))
    return betas


def simple_betas(g: SymForm, phi: str) -> List[WhiteheadExpr]:
    """beta_i = Σ_{j<k} g_ij [a_j, a_k] + g_ik phi_k."""
    k = g.rank
    betas = []
    for i in range(k - 1):
        terms = [scaled(g[i, j], pair(j + 1, k)) for j in range(k - 1) if g[i, j]]
        if g[i, k - 1]:
            terms.append(scaled(g[i, k - 1], Named(phi, k)))
        betas.append(total(terms))
    return betas


class N4Pipeline(IntegralPipeline):
    """S^3-fibrations over 3-connected 8-manifolds."""

    regime = Regime.N4
    n = 4

    @monitor_performance("construct_n4")
    def construct(self, problem: ProblemFile) -> FibrationCertificate:
        if problem.n != 4:
            raise ProblemInputError(f"the n4 pipeline needs n = 4, got {problem.n}", ["n"])
        if problem.pair is not None:
            return self._pair_from_problem(problem)
        g = problem.form().require_unimodular()
        if not g.is_even():
            return self.construct_odd(problem)
        if problem.k == 2:
            return self.construct_even_rank_two(problem)
        return self.construct_even(problem)

    def _bound(self) -> int:
        return config_manager.config.search.basis_search_bound

    def construct_odd(self, problem: ProblemFile) -> FibrationCertificate:
        """Characteristic last vector b with 3 | l'_k and (6 | l'_k or 4 ∤ g'_kk)."""
        table = self.table()
        k = problem.k
        L = self.attaching(problem, table)
        g = problem.form()
        w = characteristic_vector(g)
        transcript: List[str] = [f"characteristic vector mod 2: {w}"]
        bound = self._bound()
        b = None
        tried = 0
        for y in [(0,) * k] + list(iter_small_vectors(k, bound)):
            candidate = tuple(wi + 2 * yi for wi, yi in zip(w, y))
            if not is_primitive(candidate):
                continue
            tried += 1
            image = last_sphere_image(L, candidate)
            norm = image.coefficient("sphere", (1,), "nu")
            l_last = image.coefficient("sphere", (1,), "nup")
            if l_last % 3 == 0 and (l_last % 6 == 0 or norm % 4 != 0):
                b = candidate
                transcript.append(f"last vector {b}: g'_kk = {norm}, l'_k = {l_last} after {tried} candidates")
                break
        if b is None:
            transcript.append(f"no characteristic vector within bound {bound} after {tried} candidates")
            if 6 ** k <= ODD_RESIDUE_SCAN_LIMIT and not self._odd_residue_exists(L, w):
                transcript.append("no characteristic residue class mod 12 meets 3 | l'_k and (6 | l'_k or 4 ∤ g'_kk)")
                raise ConstructionError("no admissible characteristic basis exists for the odd form", transcript)
            raise ConstructionError("no admissible characteristic basis for the odd form", transcript)

        moved = transport(L, extend_to_basis(b))
        g2, l2 = moved.form, moved.torsion
        gkk, lk = g2[k - 1, k - 1], l2[k - 1]
        if lk % 6 == 0:
            r = 0
        else:
            r = next((r for r in range(12) if (2 * gkk * r - 4 * lk) % 24 == 0), None)
            if r is None:
                raise ConstructionError(f"no r with 2 g_kk r ≡ 4 l_k (mod 24) for g_kk={gkk}, l_k={lk}", transcript)
        transcript.append(f"r = {r}")

        betas = odd_form_betas(g2, l2, r)
        correction = -bracket_alpha(table, k, moved.vector) - compose_middle(table, moved.vector, "nup7").scale(1 - r)
        congruences = {
            "last vector characteristic": _last_characteristic(g2),
            "3 | l'_k": lk % 3 == 0,
            "6 | l'_k or 4 ∤ g'_kk": lk % 6 == 0 or gkk % 4 != 0,
        }
        target = f"sum [a_i, beta_i] = -[L, a{k}] - ({1 - r}) L @ nup7"
        return self._finish(problem, table, moved, betas, "odd-form", target, correction, congruences, transcript)

    @staticmethod
    def _odd_residue_exists(L: HiltonVector, w: Sequence[int]) -> bool:
        """Whether some characteristic class mod 12 of primitive vectors meets the odd-form congruences.

        l'_k mod 6 and g'_kk mod 4 only depend on b mod 12, and a class r with
        gcd(r, 12) = 1 lifts to a primitive vector.
        """
        for y in itertools.product(range(6), repeat=len(w)):
            r = tuple(wi + 2 * yi for wi, yi in zip(w, y))
            if math.gcd(12, *r) != 1:
                continue
            image = last_sphere_image(L, r)
            norm = image.coefficient("sphere", (1,), "nu")
            l_last = image.coefficient("sphere", (1,), "nup")
            if l_last % 3 == 0 and (l_last % 6 == 0 or norm % 4 != 0):
                return True
        return False

    def construct_even(self, problem: ProblemFile) -> FibrationCertificate:
        """Primitive b with 24 | <b,b> and s·b ≡ 0 (mod 12), s_i = l_i - g_ii/2."""
        table = self.table()
        k = problem.k
        L = self.attaching(problem, table)
        g = problem.form()
        l = problem.torsion or [0] * k
        s = [(l[i] - g[i, i] // 2) % 12 for i in range(k)]
        kernel = integer_kernel(IntMatrix.from_rows([s + [-12]], k + 1))
        lattice = lattice_basis([vec[:k] for vec in kernel], k)
        transcript = [f"linearised torsion s = {s}", f"lattice s·b ≡ 0 (mod 12) has basis {lattice}"]
        bound = self._bound()

        def admissible(b: Sequence[int]) -> bool:
            image = last_sphere_image(L, b)
            return (
                image.coefficient("sphere", (1,), "nu") % 24 == 0
                and image.coefficient("sphere", (1,), "nup") % 12 == 0
            )

        b = search_vector(k, admissible, bound, lattice=lattice)
        if b is None:
            transcript.append(f"no primitive b with 24 | <b,b> and l'_k = 0 within bound {bound}")
            raise ConstructionError("no admissible basis for the even form", transcript)
        transcript.append(f"last vector {b}")

        moved = transport(L, extend_to_basis(b))
        g2, l2 = moved.form, moved.torsion
        betas = even_torsion_betas(g2, l2)
        correction = compose_middle(table, moved.vector, "nu7") - bracket_alpha(table, k, moved.vector)
        congruences = {"24 | g'_kk": g2[k - 1, k - 1] % 24 == 0, "l'_k = 0": l2[k - 1] % 12 == 0}
        target = f"sum [a_i, beta_i] = -[L, a{k}] + L @ nu7"
        return self._finish(problem, table, moved, betas, "even-form", target, correction, congruences, transcript)

    def construct_even_rank_two(self, problem: ProblemFile) -> FibrationCertificate:
        """Hyperbolic basis, then the residue-class table for (l_1, l_2)."""
        table = self.table()
        L = self.attaching(problem, table)
        g = problem.form()
        hyperbolic = hyperbolic_basis(g)
        transcript = [f"hyperbolic basis {hyperbolic.tolist()}"]
        for name, rows in HYPERBOLIC_SYMMETRIES:
            change = hyperbolic.then(BasisChange(IntMatrix.from_rows(rows, 2)))
            moved = transport(L, change)
            l1, l2 = moved.torsion
            for row in EVEN_RANK_TWO_ROWS:
                if row.matches(l1, l2):
                    transcript.append(f"symmetry {name}: (l1, l2) = ({l1}, {l2}) matches row {row.l1}, {row.l2}")
                    return self.certify_pair(
                        problem, row.mu, row.delta_expression(), change, transcript, construction="even-rank-two"
                    )
            transcript.append(f"symmetry {name}: (l1, l2) = ({l1}, {l2}) matches no row")
        raise ConstructionError("no residue-class row applies to the hyperbolic plane", transcript)


def isotropic_vector(g: SymForm) -> Tuple[int, int]:
    """Primitive b with <b, b> = 0 for an even rank-two form of determinant -1.

    g_12^2 - g_11 g_22 = 1 makes (1 - g_12, g_11) isotropic.
    """
    a, b, c = g[0, 0], g[0, 1], g[1, 1]
    if c == 0:
        return 0, 1
    if a == 0:
        return 1, 0
    d = math.gcd(1 - b, a)
    return (1 - b) // d, a // d


def hyperbolic_basis(g: SymForm) -> BasisChange:
    """Basis (b1, b2) of an even rank-two unimodular form with g' = [[0,1],[1,0]]."""
    if g.rank != 2 or not g.is_even() or g.det() != -1:
        raise ConstructionError("hyperbolic basis needs an even indefinite unimodular form of rank two")
    b1 = isotropic_vector(g)
    completion = extend_to_basis(b1).column(0)
    t = g.value(b1, completion)
    c = tuple(t * x for x in completion)
    lam = g.norm(c) // 2
    b2 = tuple(x - lam * y for x, y in zip(c, b1))
    return BasisChange.from_columns([b1, b2])


def odd_form_betas(g: SymForm, l: Sequence[int], r: int) -> List[WhiteheadExpr]:
    """beta_i = beta'_i - (l_i - (g_ii+g_ik)/2) nup_k - (1-r) Σ_{j>i} g_ij nup_j
    + (1-r) g_ii nu_i - (1-r) l_i [a_i, a_i], beta'_i = Σ_{j<k} g_ij [a_j,a_k] + g_ik nu_k."""
    k = g.rank
    betas = []
    for i in range(k - 1):
        terms = [scaled(g[i, j], pair(j + 1, k)) for j in range(k - 1) if g[i, j]]
        terms.append(scaled(g[i, k - 1], Named("nu", k)))
        terms.append(scaled(-(l[i] - (g[i, i] + g[i, k - 1]) // 2), Named("nup", k)))
        terms += [scaled(-(1 - r) * g[i, j], Named("nup", j + 1)) for j in range(i + 1, k) if g[i, j]]
        terms.append(scaled((1 - r) * g[i, i], Named("nu", i + 1)))
        terms.append(scaled(-(1 - r) * l[i], pair(i + 1, i + 1)))
        betas.append(total(terms))
    return betas


def even_torsion_betas(g: SymForm, l: Sequence[int]) -> List[WhiteheadExpr]:
    """Even-form betas with 24 | g_kk and l_k = 0:

    beta_i = Σ_{j<k} g_ij [a_j,a_k] + Σ_{j<i} g_ij [a_i,a_j] + Σ_{i<j<=k} g_ij nu_j - l_i nup_k
             + (g_ii/2) nu_i + (g_ii/2) nup_k + l_i [a_i, a_i].
    """
    k = g.rank
    betas = []
    base = even_form_betas(g, "nu")
    for i in range(k - 1):
        half = g[i, i] // 2
        terms = [base[i], scaled(-l[i], Named("nup", k)), scaled(half, Named("nu", i + 1))]
        terms += [scaled(half, Named("nup", k)), scaled(l[i], pair(i + 1, i + 1))]
        betas.append(total(terms))
    return betas

