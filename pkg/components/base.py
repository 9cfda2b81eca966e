"""Pieces shared by the construction pipelines."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from algebra.forms import BasisChange, SymForm
from algebra.ring import PrimeSet, solve_linear
from algebra.tensorlie import (
    QuadraticRelation,
    TensorElement,
    construct_w,
    projects_to_basis,
    tensor_identity_residual,
)
from core.interfaces import IFibrationPipeline, Regime
from homotopy.expressions import WhiteheadExpr, loop_basis, render
from services.hypotheses import FiberHypothesisReport, relation_for, verify_fiber_hypotheses
from services.models import (
    BasisRecord,
    BetaRecord,
    FibrationCertificate,
    HypothesisRecord,
    LedgerEntry,
    ProblemFile,
    VanishingEvidence,
)

logger = logging.getLogger(__name__)


@dataclass
class BetaSystem:
    """The k-1 beta classes of one construction, in the new basis."""
    expressions: List[WhiteheadExpr]
    regime: Regime
    construction: str
    rho: List[TensorElement] = field(default_factory=list)
    coordinates: List[Optional[Dict[str, int]]] = field(default_factory=list)


@dataclass
class TensorLayer:
    """The exact tensor identity for g' and its projection check."""
    ws: List[TensorElement]
    relation: QuadraticRelation
    identity_holds: bool
    projects: bool


def tensor_layer(g: SymForm, n: int, ring: PrimeSet) -> TensorLayer:
    basis = loop_basis(g.rank, n)
    rel = QuadraticRelation.from_form(g, basis, ring)
    ws = construct_w(g, basis, ring)
    residual = tensor_identity_residual(ws, rel)
    return TensorLayer(ws, rel, residual.is_zero(), projects_to_basis(ws, rel))


def images_match(
    rho_betas: Sequence[TensorElement],
    ws: Sequence[TensorElement],
    g: SymForm,
    n: int,
    ring: PrimeSet,
) -> bool:
    """rho(beta_i) + w_i lies in span(l(M)) + W⊗V for W = span(a_1..a_{k-1})."""
    k = g.rank
    words = [(i, j) for i in range(k) for j in range(k)]
    relation = relation_for(g.tolist(), n, ring)
    spanning = [[relation.coefficient(w) for w in words]]
    spanning += [[1 if w == (i, j) else 0 for w in words] for i in range(k - 1) for j in range(k)]
    columns = [[row[t] for row in spanning] for t in range(len(words))]
    for rho_b, w in zip(rho_betas, ws):
        diff = rho_b + w
        target = [diff.coefficient(word) for word in words]
        if solve_linear(columns, target, ring, ncols=len(spanning)) is None:
            return False
    return True


def basis_record(
    change: BasisChange,
    g_after: SymForm,
    torsion_after: Optional[Sequence[int]] = None,
    congruences: Optional[Dict[str, bool]] = None,
) -> BasisRecord:
    return BasisRecord(
        matrix=change.tolist(),
        wedge_basis=change.dual_basis().tolist(),
        form_after=g_after.tolist(),
        torsion_after=list(torsion_after) if torsion_after is not None else None,
        congruences=congruences or {},
    )


def hypothesis_record(report: FiberHypothesisReport) -> HypothesisRecord:
    return HypothesisRecord(
        condition1=report.condition1,
        lambda_k=report.lambda_k,
        mu_invariants=report.mu_invariants,
        condition2=report.condition2,
        ambient_rank=report.ambient_rank,
        quotient_rank=report.quotient_rank,
    )


def standard_mus(k: int) -> List[List[int]]:
    """mu_i = alpha'_i for i < k."""
    return [[int(i == j) for j in range(k)] for i in range(k - 1)]


def original_mus(change: BasisChange, mus: Sequence[Sequence[int]]) -> List[List[int]]:
    """mu vectors in the original alpha basis."""
    wedge = change.dual_basis()
    return [list(wedge.apply(mu)) for mu in mus]


class BasePipeline(IFibrationPipeline):
    """Certificate assembly shared by every regime."""

    regime: Regime = Regime.AUTO

    def _assemble(
        self,
        problem: ProblemFile,
        ring: PrimeSet,
        change: BasisChange,
        g_after: SymForm,
        attaching_map: str,
        betas: BetaSystem,
        target: str,
        mus: Optional[List[List[int]]] = None,
        torsion_after: Optional[Sequence[int]] = None,
        congruences: Optional[Dict[str, bool]] = None,
        residual: Optional[Dict[str, int]] = None,
        kernel_witness: Optional[Dict[str, int]] = None,
        kernel_member: Optional[bool] = None,
        ledger: Optional[List[LedgerEntry]] = None,
        table=None,
        transcript: Optional[List[str]] = None,
    ) -> FibrationCertificate:
        """
        Run the tensor layer and the fiber hypotheses, then package a certificate.

        Args:
            problem: The validated problem file
            ring: Working ring
            change: Basis change applied to the g-lattice
            g_after: The form in the new basis
            attaching_map: L(M) rendered in the new basis
            betas: The beta system with loop images filled in
            target: The identity the betas satisfy
            mus: mu vectors in the new basis; defaults to alpha'_1..alpha'_{k-1}

        Returns:
            FibrationCertificate
        """
        n, k = problem.n, problem.k
        layer = tensor_layer(g_after, n, ring)
        standard = mus is None
        mus = standard_mus(k) if mus is None else mus
        relation = relation_for(g_after.tolist(), n, ring)
        report = verify_fiber_hypotheses(mus, betas.rho, relation, ring)
        matched = images_match(betas.rho, layer.ws, g_after, n, ring) if standard else None
        coordinates = betas.coordinates or [None] * len(betas.expressions)

        certificate = FibrationCertificate(
            regime=self.regime.value,
            construction=betas.construction,
            problem=problem,
            primes=list(ring.primes),
            table=table.name if table is not None else None,
            table_variant=table.variant if table is not None else None,
            table_checksum=table.checksum if table is not None else None,
            basis=basis_record(change, g_after, torsion_after, congruences),
            attaching_map=attaching_map,
            mu=mus,
            mu_original=original_mus(change, mus),
            beta=[
                BetaRecord(index=i + 1, expression=render(e), coordinates=c, rho=r.to_dict())
                for i, (e, c, r) in enumerate(zip(betas.expressions, coordinates, betas.rho))
            ],
            evidence=VanishingEvidence(
                tensor_identity=layer.identity_holds,
                projects_to_basis=layer.projects,
                beta_images_match=matched,
                target=target,
                residual=residual,
                kernel_member=kernel_member,
                kernel_witness=kernel_witness,
                ledger=ledger or [],
            ),
            hypotheses=hypothesis_record(report),
            transcript=transcript or [],
        )
        logger.info(
            f"{self.regime.value} certificate for n={n}, k={k}: "
            f"{'ok' if certificate.ok else 'FAILED'} ({betas.construction})"
        )
        return certificate
