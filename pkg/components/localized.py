"""Construction after inverting the torsion primes of pi_{2n-1}(S^n)."""
import logging
from fractions import Fraction
from typing import List, Tuple

from algebra.forms import BasisChange, SymForm, extend_to_basis, find_primitive_divisible, search_vector
from algebra.ring import PrimeSet
from core.config import config_manager
from core.exceptions import DataError, ProblemInputError, SearchExhaustedError
from core.interfaces import Regime
from homotopy.expressions import WhiteheadExpr, pair, render, rho, scaled, total
from homotopy.tables import generic_facts
from services.models import FibrationCertificate, LedgerEntry, ProblemFile
from components.base import BasePipeline, BetaSystem
from util.performance import monitor_performance

logger = logging.getLogger(__name__)


def localized_betas(g: SymForm) -> List[WhiteheadExpr]:
    """beta_i = Σ_{j<k} g_ij [a_j, a_k] + 1/2 g_ik [a_k, a_k]."""
    k = g.rank
    betas = []
    for i in range(k - 1):
        terms = [scaled(g[i, j], pair(j + 1, k)) for j in range(k - 1) if g[i, j]]
        if g[i, k - 1]:
            terms.append(scaled(Fraction(g[i, k - 1], 2), pair(k, k)))
        betas.append(total(terms))
    return betas


def rational_attaching_map(g: SymForm) -> WhiteheadExpr:
    """L = Σ_{i<j} g_ij [a_i, a_j] + 1/2 Σ g_ii [a_i, a_i] once 2 and T_n are inverted."""
    k = g.rank
    terms = []
    for i in range(k):
        if g[i, i]:
            terms.append(scaled(Fraction(g[i, i], 2), pair(i + 1, i + 1)))
        for j in range(i + 1, k):
            if g[i, j]:
                terms.append(scaled(g[i, j], pair(i + 1, j + 1)))
    return total(terms)


class LocalizedPipeline(BasePipeline):
    """beta classes from the tensor construction, with a ledger for the homotopy terms."""

    regime = Regime.LOCALIZED

    def choose_basis(self, g: SymForm, n: int, ring: PrimeSet, transcript: List[str]) -> Tuple[BasisChange, bool]:
        """Arrange 3 | g'_kk; returns the change and whether the congruence holds."""
        k = g.rank
        if g[k - 1, k - 1] % 3 == 0:
            transcript.append(f"g_kk = {g[k - 1, k - 1]} already divisible by 3")
            return BasisChange.identity(k), True
        try:
            if k >= 3:
                found = find_primitive_divisible(g, 3)
                transcript.append(f"primitive vector {found.vector} with norm {found.norm} ({found.path})")
                return extend_to_basis(found.vector), True
            bound = config_manager.config.search.basis_search_bound
            v = search_vector(k, lambda x: g.norm(x) % 3 == 0, bound)
            if v is None:
                raise SearchExhaustedError("no primitive vector with 3 | <v,v>", bound)
            transcript.append(f"rank-two search found {v} with norm {g.norm(v)}")
            return extend_to_basis(v), True
        except SearchExhaustedError as e:
            transcript.append(f"no basis with 3 | g_kk: {e}")
            if 3 in ring or n == 2:
                return BasisChange.identity(k), False
            raise DataError(
                f"cannot arrange 3 | g_kk for {g.tolist()} and 3 is not inverted"
            ) from e

    @monitor_performance("construct_localized")
    def construct(self, problem: ProblemFile) -> FibrationCertificate:
        """
        Build the localized certificate.

        Args:
            problem: Problem with primes ⊇ T_n and 2 inverted

        Returns:
            FibrationCertificate whose homotopy terms are itemised in the ledger
        """
        n, k = problem.n, problem.k
        ring = problem.ring()
        if 2 not in ring:
            raise ProblemInputError("the localized construction needs 2 inverted", ["primes"])
        missing = [p for p in problem.torsion_primes if p not in ring]
        if missing:
            raise ProblemInputError(f"torsion primes {missing} are not inverted", ["primes", "torsion_primes"])

        transcript: List[str] = []
        g = problem.form().require_unimodular()
        change, divisible = self.choose_basis(g, n, ring, transcript)
        g2 = g.transform(change)
        gkk = g2[k - 1, k - 1]

        expressions = localized_betas(g2)
        betas = BetaSystem(
            expressions=expressions,
            regime=self.regime,
            construction="localized",
            rho=[rho(e, k, n, {}, ring) for e in expressions],
        )

        facts = generic_facts()
        if divisible:
            reason = f"3 | g'_kk = {gkk}"
        elif 3 in ring:
            reason = "3 is inverted"
        else:
            reason = "[[iota_2, iota_2], iota_2] = 0"
        ledger = [
            LedgerEntry(
                term=f"1/2 g'_kk [[a{k}, a{k}], a{k}]",
                hypothesis="3 | g'_kk, 3 inverted, or n = 2",
                source=facts.source("triple_torsion"),
                holds=divisible or 3 in ring or n == 2,
                evidence=reason,
            ),
            LedgerEntry(
                term="difference between Whitehead products and their loop homology images",
                hypothesis="every prime of T_n is inverted",
                source=facts.source("rho_injective"),
                holds=not missing,
                evidence=f"T_n = {sorted(problem.torsion_primes)}, S = {list(ring.primes)}",
            ),
        ]

        return self._assemble(
            problem,
            ring,
            change,
            g2,
            attaching_map=render(rational_attaching_map(g2)),
            betas=betas,
            target=f"sum_i [a_i, beta_i] = [L, a{k}] after inverting S, up to the ledger terms",
            congruences={"3 | g'_kk": gkk % 3 == 0},
            ledger=ledger,
            transcript=transcript,
        )
