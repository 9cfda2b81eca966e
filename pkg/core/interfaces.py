"""Core interfaces and enums shared across the certifier."""
from abc import ABC, abstractmethod
from enum import Enum
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from homotopy.tables import SphereTable
    from services.models import FibrationCertificate, ProblemFile


class Regime(Enum):
    """Construction pipeline selector."""
    AUTO = "auto"
    LOCALIZED = "localized"
    N2 = "n2"
    N4 = "n4"
    LARGE_K = "large_k"


class SeriesMode(Enum):
    """Which Hilbert series: the loop algebra of M_k or of the connected-sum fibre."""
    M = "M"
    E = "E"


class SearchFamily(Enum):
    """Coefficient family scanned by the bounded kernel search."""
    SPHERE = "sphere"
    FULL = "full"


class IFibrationPipeline(ABC):
    """Interface for a construction pipeline of one regime."""

    regime: Regime

    @abstractmethod
    def construct(self, problem: "ProblemFile") -> "FibrationCertificate":
        """Build and self-check a certificate for the problem."""
        pass


class ITableSource(ABC):
    """Interface for loading homotopy tables."""

    @abstractmethod
    def load(self, name: str, variant: Optional[str] = None) -> "SphereTable":
        """Load a table by name (n2, n4, n8, generic) and optional sign variant."""
        pass
