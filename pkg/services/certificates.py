"""Problem loading, pipeline dispatch and certificate (de)serialization."""
import logging
from pathlib import Path
from typing import Dict, List, Type, Union

import yaml
from pydantic import ValidationError

from algebra.forms import BasisChange
from algebra.ring import IntMatrix
from core.exceptions import CertificateError, FormError, ProblemInputError, RingError
from core.interfaces import IFibrationPipeline, Regime
from services.models import CERTIFICATE_FORMAT, FibrationCertificate, ProblemFile

logger = logging.getLogger(__name__)


def _pipelines() -> Dict[Regime, Type[IFibrationPipeline]]:
    from components.large_k import LargeKPipeline
    from components.localized import LocalizedPipeline
    from components.low_dim import N2Pipeline, N4Pipeline

    return {
        Regime.LOCALIZED: LocalizedPipeline,
        Regime.N2: N2Pipeline,
        Regime.N4: N4Pipeline,
        Regime.LARGE_K: LargeKPipeline,
    }


def pipeline_for(regime: Regime) -> IFibrationPipeline:
    if regime is Regime.AUTO:
        raise ProblemInputError("resolve the regime before choosing a pipeline", ["regime"])
    return _pipelines()[regime]()


def construct(problem: ProblemFile) -> FibrationCertificate:
    """Dispatch a problem to the pipeline of its resolved regime."""
    regime = problem.resolved_regime()
    if problem.pair is not None and regime not in (Regime.N2, Regime.N4):
        raise ProblemInputError(f"pair certification needs the n2 or n4 regime, got {regime.value}", ["pair"])
    logger.info(f"Constructing n={problem.n}, k={problem.k} in regime {regime.value}")
    return pipeline_for(regime).construct(problem)


def load_problem(source: Union[str, Path, dict]) -> ProblemFile:
    """Read a YAML or JSON problem file (or an already parsed mapping)."""
    if isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        if not path.exists():
            raise ProblemInputError(f"problem file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ProblemInputError(f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ProblemInputError("a problem file must be a mapping")
    try:
        return ProblemFile.model_validate(data)
    except ValidationError as e:
        fields = [".".join(str(p) for p in err["loc"]) for err in e.errors()]
        raise ProblemInputError(f"invalid problem: {e.errors()[0]['msg']}", fields) from e


def dump_certificate(certificate: FibrationCertificate) -> str:
    return yaml.safe_dump(certificate.model_dump(mode="json"), sort_keys=True, allow_unicode=True)


def write_certificate(certificate: FibrationCertificate, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_certificate(certificate), encoding="utf-8")
    logger.info(f"Certificate written to {path}")
    return path


def read_certificate(path: Union[str, Path]) -> FibrationCertificate:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as e:
        raise CertificateError(f"cannot read certificate {path}: {e}") from e
    if not isinstance(data, dict) or data.get("format") != CERTIFICATE_FORMAT:
        raise CertificateError(f"{path} is not a {CERTIFICATE_FORMAT} document")
    try:
        return FibrationCertificate.model_validate(data)
    except ValidationError as e:
        raise CertificateError(f"malformed certificate {path}: {e.errors()[0]['msg']}") from e


def recorded_problems(certificate: FibrationCertificate) -> List[str]:
    """Checks that need no re-run: the basis, the transported form and the recorded verdicts."""
    problems: List[str] = []
    basis = certificate.basis
    try:
        change = BasisChange(IntMatrix.from_rows(basis.matrix))
    except (FormError, RingError, ValueError) as e:
        return [f"basis matrix rejected: {e}"]
    g = certificate.problem.form()
    if g.transform(change).tolist() != basis.form_after:
        problems.append("form_after differs from P^t g P")
    if change.dual_basis().tolist() != basis.wedge_basis:
        problems.append("wedge_basis differs from P^{-T}")
    failed = [name for name, holds in basis.congruences.items() if not holds]
    if failed:
        problems.append(f"congruences fail: {failed}")
    evidence = certificate.evidence
    if not evidence.tensor_identity:
        problems.append("tensor identity fails")
    if evidence.residual:
        problems.append(f"nonzero residual {evidence.residual}")
    if evidence.kernel_member is False:
        problems.append("product is outside the kernel subgroup")
    if not certificate.hypotheses.ok:
        problems.append("fiber hypotheses fail")
    problems += [f"ledger term {e.term} not covered" for e in evidence.ledger if not e.holds]
    return problems


def verify_certificate(certificate: FibrationCertificate) -> FibrationCertificate:
    """
    Re-run the construction recorded in a certificate and compare.

    Args:
        certificate: A certificate read back from disk

    Returns:
        The freshly built certificate, identical to the input

    Raises:
        CertificateError: if any recorded check fails or the re-run differs
    """
    problems = recorded_problems(certificate)
    if problems:
        raise CertificateError("; ".join(problems))
    fresh = construct(certificate.problem)
    if dump_certificate(fresh) != dump_certificate(certificate):
        differing = sorted(
            key for key, value in fresh.model_dump(mode="json").items()
            if certificate.model_dump(mode="json").get(key) != value
        )
        raise CertificateError(f"re-run differs in {differing}")
    logger.info("Certificate re-verified")
    return fresh
