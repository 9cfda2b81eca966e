"""Pydantic models for problem files and certificates."""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, StrictInt, field_validator, model_validator
from sympy import isprime

from algebra.forms import SymForm
from algebra.ring import IntMatrix, PrimeSet
from core.interfaces import Regime

CERTIFICATE_FORMAT = "fibration-certificate/1"


def _odd_part(d: int) -> int:
    d = abs(d)
    while d and d % 2 == 0:
        d //= 2
    return d


class StableModel(BaseModel):
    """Abstract model of E(pi_{2n-2} S^{n-1}) and the stable stem after inverting 2."""
    model_config = ConfigDict(extra="forbid")

    unstable_factors: List[StrictInt] = Field(..., description="Invariant factors of E(pi_{2n-2}(S^{n-1}))")
    stable_factors: List[StrictInt] = Field(..., description="Invariant factors of the stable stem pi^s_{n-1}")
    suspension: List[List[StrictInt]] = Field(
        ..., description="Matrix of the suspension map, stable x unstable coordinates"
    )

    @field_validator("unstable_factors", "stable_factors")
    @classmethod
    def _positive(cls, v: List[int]) -> List[int]:
        if any(d < 1 for d in v):
            raise ValueError("invariant factors must be positive (the groups are finite)")
        return v

    @model_validator(mode="after")
    def _shape(self) -> "StableModel":
        if len(self.suspension) != len(self.stable_factors):
            raise ValueError("suspension needs one row per stable factor")
        if any(len(row) != len(self.unstable_factors) for row in self.suspension):
            raise ValueError("suspension needs one column per unstable factor")
        return self

    def odd_factors(self) -> List[int]:
        """Odd parts of the stable factors, those > 1 only."""
        return [_odd_part(d) for d in self.stable_factors if _odd_part(d) > 1]

    @property
    def cyclic_summands(self) -> int:
        return len(self.odd_factors())

    def stable_coordinates(self, unstable: List[int]) -> List[int]:
        """Images of unstable coordinates in the odd parts of the stable stem."""
        out = []
        for row, d in zip(self.suspension, self.stable_factors):
            odd = _odd_part(d)
            if odd > 1:
                out.append(sum(a * b for a, b in zip(row, unstable)) % odd)
        return out


class PairChoice(BaseModel):
    """A user-supplied (mu_1, delta_1) for k = 2."""
    model_config = ConfigDict(extra="forbid")

    mu: List[StrictInt] = Field(..., description="mu_1 in the alpha basis")
    delta: str = Field(..., description="delta_1 as a Whitehead expression")


class ProblemFile(BaseModel):
    """Input for the construct command."""
    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    n: StrictInt = Field(..., description="Dimension of the cells; M is (n-1)-connected of dimension 2n")
    k: StrictInt = Field(..., description="Rank of H_n(M)")
    intersection: Optional[List[List[StrictInt]]] = Field(None, description="Intersection matrix")
    inverse: Optional[List[List[StrictInt]]] = Field(None, description="Inverse intersection matrix g")
    torsion: Optional[List[StrictInt]] = Field(None, description="Torsion coefficients l_i of L(M)")
    primes: List[StrictInt] = Field(default_factory=list, description="Primes inverted by the construction")
    torsion_primes: List[StrictInt] = Field(
        default_factory=list, description="T_n, primes with torsion in pi_{2n-1}(S^n)"
    )
    stable_model: Optional[StableModel] = Field(None, description="Stable stem model for the large-k regime")
    stable_coordinates: Optional[List[List[StrictInt]]] = Field(
        None, description="Unstable coordinates of omega_i, one row per i"
    )
    regime: Regime = Field(Regime.AUTO, description="Pipeline selector")
    pair: Optional[PairChoice] = Field(None, description="Certify this (mu_1, delta_1) instead of constructing")

    @field_validator("primes", "torsion_primes")
    @classmethod
    def _primes(cls, v: List[int]) -> List[int]:
        bad = [p for p in v if not isprime(p)]
        if bad:
            raise ValueError(f"not prime: {bad}")
        return sorted(set(v))

    @model_validator(mode="after")
    def _consistent(self) -> "ProblemFile":
        if self.k < 2:
            raise ValueError("k ≥ 2 required")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 2, got {self.n}")
        if (self.intersection is None) == (self.inverse is None):
            raise ValueError("give exactly one of intersection or inverse")
        matrix = self.intersection if self.intersection is not None else self.inverse
        if len(matrix) != self.k or any(len(row) != self.k for row in matrix):
            raise ValueError(f"matrix must be {self.k}x{self.k}")
        M = IntMatrix.from_rows(matrix, self.k)
        if not M.is_symmetric():
            raise ValueError("matrix must be symmetric")
        if abs(M.det()) != 1:
            raise ValueError(f"matrix must be unimodular, det = {M.det()}")
        if self.torsion is not None and len(self.torsion) != self.k:
            raise ValueError(f"torsion needs {self.k} entries")
        if self.stable_coordinates is not None:
            if self.stable_model is None:
                raise ValueError("stable_coordinates need a stable_model")
            width = len(self.stable_model.unstable_factors)
            if len(self.stable_coordinates) != self.k or any(len(r) != width for r in self.stable_coordinates):
                raise ValueError(f"stable_coordinates must be {self.k}x{width}")
        if self.pair is not None and self.k != 2:
            raise ValueError("pair certification needs k = 2")
        return self

    def form(self) -> SymForm:
        """The inverse intersection form g."""
        if self.inverse is not None:
            return SymForm.from_rows(self.inverse)
        return SymForm.from_rows(self.intersection).inverse()

    def ring(self) -> PrimeSet:
        return PrimeSet.of(self.primes)

    def resolved_regime(self) -> Regime:
        if self.regime is not Regime.AUTO:
            return self.regime
        if self.n == 2:
            return Regime.N2
        if self.n == 4 and not self.primes:
            return Regime.N4
        if self.stable_model is not None:
            return Regime.LARGE_K
        return Regime.LOCALIZED


class BasisRecord(BaseModel):
    """Basis change applied before constructing the beta classes."""
    matrix: List[List[int]] = Field(..., description="P, columns are the new basis of the g-lattice")
    wedge_basis: List[List[int]] = Field(..., description="Columns are the new alpha'_a in old alpha coordinates")
    form_after: List[List[int]] = Field(..., description="g' = P^t g P")
    torsion_after: Optional[List[int]] = Field(None, description="l' read from the transported attaching map")
    congruences: Dict[str, bool] = Field(default_factory=dict, description="Congruences the basis achieves")


class BetaRecord(BaseModel):
    index: int
    expression: str = Field(..., description="beta_i in the new basis")
    coordinates: Optional[Dict[str, int]] = Field(None, description="Hilton coordinates, table regimes only")
    rho: Dict[str, str] = Field(..., description="Loop homology image")


class LedgerEntry(BaseModel):
    """A homotopy-level term not checked by machine, with the fact that kills it."""
    term: str
    hypothesis: str
    source: str
    holds: bool
    evidence: str


class VanishingEvidence(BaseModel):
    tensor_identity: bool = Field(..., description="Σ[v_i, w_i] = [ℒ, v_k] holds exactly")
    projects_to_basis: bool
    beta_images_match: Optional[bool] = Field(
        None, description="rho(beta_i) = -w_i modulo l(M) and W⊗V"
    )
    target: str = Field(..., description="Identity the beta classes satisfy")
    residual: Optional[Dict[str, int]] = Field(None, description="Hilton coordinates of the residual, empty when exact")
    kernel_member: Optional[bool] = None
    kernel_witness: Optional[Dict[str, int]] = None
    ledger: List[LedgerEntry] = Field(default_factory=list)


class HypothesisRecord(BaseModel):
    condition1: bool
    lambda_k: List[int]
    mu_invariants: List[int]
    condition2: bool
    ambient_rank: int
    quotient_rank: int

    @property
    def ok(self) -> bool:
        return self.condition1 and self.condition2


class FibrationCertificate(BaseModel):
    format: str = CERTIFICATE_FORMAT
    regime: str
    construction: str = Field(..., description="Which beta system was used")
    problem: ProblemFile
    primes: List[int] = Field(..., description="Primes inverted in the working ring")
    table: Optional[str] = None
    table_variant: Optional[str] = None
    table_checksum: Optional[str] = None
    basis: BasisRecord
    attaching_map: str = Field(..., description="L(M) in the new basis")
    mu: List[List[int]] = Field(..., description="mu_i in the new alpha' basis")
    mu_original: List[List[int]] = Field(..., description="mu_i in the original alpha basis")
    beta: List[BetaRecord]
    evidence: VanishingEvidence
    hypotheses: HypothesisRecord
    transcript: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        ledger_ok = all(entry.holds for entry in self.evidence.ledger)
        kernel_ok = self.evidence.kernel_member is not False
        exact = not self.evidence.residual and self.evidence.beta_images_match is not False
        return self.evidence.tensor_identity and kernel_ok and exact and ledger_ok and self.hypotheses.ok
