"""Construction for k larger than the number of odd cyclic summands of the stable stem."""
import itertools
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from algebra.forms import BasisChange, SymForm, extend_to_basis, search_vector
from algebra.ring import IntMatrix, PrimeSet, integer_kernel, lattice_basis
from core.config import config_manager
from core.exceptions import ConstructionError, ProblemInputError
from core.interfaces import Regime
from homotopy.expressions import Alpha, Compose, WhiteheadExpr, pair, render, rho, scaled, total
from homotopy.tables import generic_facts
from services.models import FibrationCertificate, LedgerEntry, ProblemFile, StableModel
from components.base import BasePipeline, BetaSystem
from util.performance import monitor_performance

logger = logging.getLogger(__name__)


def omega_name(i: int) -> str:
    return f"omega{i}"


def stable_lattice(stable: Sequence[Sequence[int]], factors: Sequence[int], k: int) -> Optional[List[Tuple[int, ...]]]:
    """Basis of {b in Z^k : Σ_i b_i S_ij ≡ 0 (mod d_j)}; None when there are no factors."""
    if not factors:
        return None
    r = len(factors)
    rows = []
    for j, d in enumerate(factors):
        rows.append([stable[i][j] for i in range(k)] + [-d if t == j else 0 for t in range(r)])
    kernel = integer_kernel(IntMatrix.from_rows(rows, k + r))
    return lattice_basis([vec[:k] for vec in kernel], k)


def stable_image(b: Sequence[int], stable: Sequence[Sequence[int]], factors: Sequence[int]) -> List[int]:
    return [sum(bi * row[j] for bi, row in zip(b, stable)) % d for j, d in enumerate(factors)]


RESIDUE_SCAN_LIMIT = 50_000


def admissible_residue(
    g: SymForm, stable: Sequence[Sequence[int]], factors: Sequence[int]
) -> Optional[Tuple[int, ...]]:
    """A residue class mod lcm(3, factors) of primitive vectors meeting both basis conditions, or None.

    Both conditions only depend on b modulo that lcm, and every residue r with
    gcd(r, modulus) = 1 lifts to a primitive vector, so None means no basis exists.
    """
    modulus = math.lcm(3, *factors)
    for r in itertools.product(range(modulus), repeat=g.rank):
        if math.gcd(modulus, *r) != 1:
            continue
        if g.norm(r) % 3 == 0 and not any(stable_image(r, stable, factors)):
            return r
    return None


def large_k_betas(g: SymForm) -> List[WhiteheadExpr]:
    """beta_i = Σ_{j<k} g_ij [a_j, a_k] + 1/2 g_ik [a_k, a_k] - a_k @ omega_i."""
    k = g.rank
    betas = []
    for i in range(k - 1):
        terms = [scaled(g[i, j], pair(j + 1, k)) for j in range(k - 1) if g[i, j]]
        if g[i, k - 1]:
            terms.append(scaled(Fraction(g[i, k - 1], 2), pair(k, k)))
        terms.append(scaled(-1, Compose(Alpha(k), omega_name(i + 1))))
        betas.append(total(terms))
    return betas


class LargeKPipeline(BasePipeline):
    """Basis change killing the stable part of omega'_k, then the tensor construction."""

    regime = Regime.LARGE_K

    def choose_basis(
        self, g: SymForm, model: StableModel, coordinates: Sequence[Sequence[int]], transcript: List[str]
    ) -> BasisChange:
        k = g.rank
        factors = model.odd_factors()
        stable = [model.stable_coordinates(list(x)) for x in coordinates]
        transcript.append(f"odd stable factors {factors}, stable coordinates {stable}")

        last = tuple(int(i == k - 1) for i in range(k))
        if g.norm(last) % 3 == 0 and not any(stable_image(last, stable, factors)):
            transcript.append("given basis already satisfies both conditions")
            return BasisChange.identity(k)

        lattice = stable_lattice(stable, factors, k)
        if lattice is not None:
            transcript.append(f"stable kernel lattice basis {lattice}")
        bound = config_manager.config.search.basis_search_bound
        b = search_vector(k, lambda v: g.norm(v) % 3 == 0, bound, lattice=lattice)
        if b is None:
            transcript.append(f"no primitive vector within bound {bound}")
            modulus = math.lcm(3, *factors)
            if modulus ** k <= RESIDUE_SCAN_LIMIT and admissible_residue(g, stable, factors) is None:
                transcript.append(f"no residue class mod {modulus} meets both conditions")
                raise ConstructionError("no basis with trivial stable omega'_k and 3 | g'_kk exists", transcript)
            raise ConstructionError("no basis with trivial stable omega'_k and 3 | g'_kk", transcript)
        transcript.append(f"last vector {b} with norm {g.norm(b)}")
        return extend_to_basis(b)

    @monitor_performance("construct_large_k")
    def construct(self, problem: ProblemFile) -> FibrationCertificate:
        """
        Build the certificate in the large-k regime over Z[1/2].

        Args:
            problem: Problem carrying a stable model and the unstable coordinates of each omega_i

        Returns:
            FibrationCertificate with a ledger for the homotopy-level terms
        """
        model = problem.stable_model
        if model is None:
            raise ProblemInputError("the large-k construction needs a stable model", ["stable_model"])
        n, k = problem.n, problem.k
        r = model.cyclic_summands
        if k <= r:
            raise ProblemInputError(
                f"k = {k} does not exceed the {r} odd cyclic summands of the stable stem", ["k", "stable_model"]
            )
        ring = PrimeSet.of(sorted(set(problem.primes) | {2}))
        width = len(model.unstable_factors)
        coordinates = problem.stable_coordinates or [[0] * width for _ in range(k)]

        transcript: List[str] = []
        g = problem.form().require_unimodular()
        change = self.choose_basis(g, model, coordinates, transcript)
        g2 = g.transform(change)
        gkk = g2[k - 1, k - 1]
        moved = (change.substitution() @ IntMatrix.from_rows(coordinates, width)).tolist()
        omega_last = model.stable_coordinates(moved[k - 1])
        factors = model.odd_factors()
        transcript.append(f"unstable coordinates after the change {moved}")

        expressions = large_k_betas(g2)
        hopf = {omega_name(i + 1): 0 for i in range(k - 1)}
        betas = BetaSystem(
            expressions=expressions,
            regime=self.regime,
            construction="large-k",
            rho=[rho(e, k, n, hopf, ring) for e in expressions],
        )

        facts = generic_facts()
        stable_trivial = all(c % d == 0 for c, d in zip(omega_last, factors))
        ledger = [
            LedgerEntry(
                term=f"1/2 g'_kk [[a{k}, a{k}], a{k}]",
                hypothesis="3 | g'_kk",
                source=facts.source("triple_torsion"),
                holds=gkk % 3 == 0,
                evidence=f"g'_kk = {gkk}",
            ),
            LedgerEntry(
                term=f"[a{k}, a{k} @ E(x'_{k})]",
                hypothesis="the suspension of omega'_k is trivial on odd stable summands",
                source=facts.source("suspension_bracket"),
                holds=stable_trivial,
                evidence=f"stable image {omega_last} in {factors}",
            ),
            LedgerEntry(
                term="decomposition omega_i = 1/2 g_ii [iota, iota] + E(x_i)",
                hypothesis="2 is inverted",
                source=facts.source("splitting"),
                holds=2 in ring,
                evidence=f"S = {list(ring.primes)}",
            ),
        ]
        attaching = total(
            [scaled(g2[i, j], pair(i + 1, j + 1)) for i in range(k) for j in range(i + 1, k) if g2[i, j]]
            + [Compose(Alpha(i + 1), omega_name(i + 1)) for i in range(k)]
        )
        return self._assemble(
            problem,
            ring,
            change,
            g2,
            attaching_map=render(attaching),
            betas=betas,
            target=f"sum_i [a_i, beta_i] = [L, a{k}] over Z[1/2], up to the ledger terms",
            congruences={"3 | g'_kk": gkk % 3 == 0, "E(omega'_k) = 0": stable_trivial},
            ledger=ledger,
            transcript=transcript,
        )
