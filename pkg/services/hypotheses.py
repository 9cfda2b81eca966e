"""Checks of the two loop-homology hypotheses a beta system must satisfy.

(1) The map Z^{k-1} -> H_n(M) given by the mu_i is injective with free
    cokernel of rank one.
(2) The images rho(beta_i) project to a basis of
    H_{2n-2}(ΩM) / (W·H_{n-1}), W the span of the mu_i.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from algebra.forms import SymForm
from algebra.ring import INTEGERS, IntMatrix, PrimeSet, matrix_rank, smith_normal_form, spans_free_module
from algebra.tensorlie import GradedBasis, QuadraticRelation, TensorElement, rank_oracle
from core.exceptions import OracleBoundError, TensorError
from homotopy.expressions import loop_basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiberHypothesisReport:
    condition1: bool
    lambda_k: List[int]
    mu_invariants: List[int]
    condition2: bool
    ambient_rank: int
    quotient_rank: int
    oracle_rank: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.condition1 and self.condition2


def _square_words(k: int) -> List[tuple]:
    return [(i, j) for i in range(k) for j in range(k)]


def _row(e: TensorElement, k: int) -> List:
    return [e.coefficient(w) for w in _square_words(k)]


def verify_fiber_hypotheses(
    mus: Sequence[Sequence[int]],
    rho_betas: Sequence[TensorElement],
    relation: TensorElement,
    ring: PrimeSet = INTEGERS,
) -> FiberHypothesisReport:
    """Conditions (1) and (2) for k-1 vectors mu_i and loop images rho(beta_i).

    ``relation`` spans the degree 2(n-1) relation of the loop algebra, for
    instance rho(L).
    """
    k = relation.basis.rank
    if len(mus) != k - 1 or len(rho_betas) != k - 1:
        raise TensorError(f"need {k - 1} mu vectors and beta images for rank {k}")
    if any(len(mu) != k for mu in mus):
        raise TensorError(f"mu vectors must have length {k}")
    for e in list(rho_betas) + [relation]:
        if e.basis != relation.basis:
            raise TensorError("beta images and relation live over different bases")
        if not e.is_zero() and (not e.is_homogeneous() or e.degree != 2 * relation.basis.degree(0)):
            raise TensorError("beta images must be homogeneous of degree 2(n-1)")

    columns = IntMatrix.from_columns([list(mu) for mu in mus], nrows=k)
    snf = smith_normal_form(columns)
    invariants = list(snf.diagonal[: k - 1])
    condition1 = snf.rank == k - 1 and all(abs(ring.strip(d)) == 1 for d in invariants)
    lambda_k = list(snf.U.inverse().column(k - 1))

    ambient = k * k - 1
    words = _square_words(k)
    relation_row = _row(relation, k)
    w_rows = [[mu[i] if j == t else 0 for (i, j) in words] for mu in mus for t in range(k)]
    A = [relation_row] + w_rows
    quotient_rank = k * k - matrix_rank(A, k * k)
    rows = A + [_row(e, k) for e in rho_betas]
    condition2 = quotient_rank == k - 1 and spans_free_module(rows, ring, k * k)

    oracle = None
    try:
        oracle = rank_oracle(_relation(relation), 2 * relation.basis.degree(0))
    except (OracleBoundError, TensorError) as e:
        logger.debug("rank oracle skipped: %s", e)
    if oracle is not None and oracle != ambient:
        logger.warning("rank oracle gives %d, expected %d", oracle, ambient)

    return FiberHypothesisReport(
        condition1=condition1,
        lambda_k=lambda_k,
        mu_invariants=invariants,
        condition2=condition2,
        ambient_rank=ambient if oracle is None else oracle,
        quotient_rank=quotient_rank,
        oracle_rank=oracle,
    )


def _relation(element: TensorElement) -> QuadraticRelation:
    """Wrap a degree-two element as a relation; the form records its coefficients."""
    k = element.basis.rank
    entries = [[int(element.coefficient((i, j))) for j in range(k)] for i in range(k)]
    return QuadraticRelation(element, SymForm.from_rows(entries))


def relation_for(g_rows: Sequence[Sequence[int]], n: int, ring: PrimeSet = INTEGERS) -> TensorElement:
    """l(M) = -Σ g_ij a_i⊗a_j over the loop generators."""
    k = len(g_rows)
    basis: GradedBasis = loop_basis(k, n)
    return TensorElement(basis, {(i, j): -g_rows[i][j] for i in range(k) for j in range(k)}, ring)
