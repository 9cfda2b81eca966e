"""Hilbert series of the loop-homology algebras and Lie rank recovery."""
import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from core.exceptions import SeriesError
from core.interfaces import SeriesMode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerSeries:
    """Integer power series truncated at ``order`` (inclusive)."""
    coefficients: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, d: int) -> int:
        return self.coefficients[d] if 0 <= d < len(self.coefficients) else 0

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        order = min(self.order, other.order)
        out = [0] * (order + 1)
        for i, a in enumerate(self.coefficients[: order + 1]):
            if a:
                for j in range(order + 1 - i):
                    out[i + j] += a * other[j]
        return PowerSeries(tuple(out))

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coefficients)


def polynomial(terms: Dict[int, int], order: int) -> PowerSeries:
    return PowerSeries(tuple(terms.get(d, 0) for d in range(order + 1)))


def invert(denominator: PowerSeries) -> PowerSeries:
    """1/denominator for a series with constant term ±1."""
    c0 = denominator[0]
    if c0 not in (1, -1):
        raise SeriesError(f"constant term {c0} is not invertible over Z")
    out = [0] * (denominator.order + 1)
    out[0] = c0
    for d in range(1, denominator.order + 1):
        acc = sum(denominator[i] * out[d - i] for i in range(1, d + 1))
        out[d] = -acc * c0
    return PowerSeries(tuple(out))


def denominator(k: int, n: int, mode: SeriesMode, order: int) -> PowerSeries:
    """1 - k t^m + t^{2m} (mode M) or 1 - (k-1)t^m - (k-1)t^{2m} + t^{3m} (mode E), m = n-1."""
    m = n - 1
    if mode is SeriesMode.M:
        terms = {0: 1, m: -k, 2 * m: 1}
    else:
        terms = {0: 1, m: -(k - 1), 2 * m: -(k - 1), 3 * m: 1}
    merged: Dict[int, int] = {}
    for d, c in terms.items():
        merged[d] = merged.get(d, 0) + c
    return polynomial(merged, order)


def quadratic_hilbert(k: int, n: int, order: int, mode: SeriesMode = SeriesMode.M) -> PowerSeries:
    """Truncated Hilbert series of T(a_1..a_k)/(l) (mode M) or of the connected-sum algebra (mode E)."""
    if k < 1:
        raise SeriesError("k must be at least 1")
    if order < 0:
        raise SeriesError("order must be nonnegative")
    if n < 2 or n % 2:
        raise SeriesError(f"n must be an even integer >= 2, got {n}")
    return invert(denominator(k, n, mode, order))


def product_series(ranks: Sequence[int], order: int) -> PowerSeries:
    """∏_{d odd}(1+t^d)^{l_d} / ∏_{d even}(1-t^d)^{l_d}; ranks[d-1] is l_d."""
    result = polynomial({0: 1}, order)
    for d, l in enumerate(ranks, start=1):
        if d > order or l == 0:
            continue
        result = result * _factor(d, l, order)
    return result


def _factor(d: int, l: int, order: int) -> PowerSeries:
    if d % 2:
        # (1 + t^d)^l
        return polynomial({d * j: comb(l, j) for j in range(l + 1) if d * j <= order}, order)
    # (1 - t^d)^{-l} = Σ C(l+j-1, j) t^{dj}
    return polynomial({d * j: comb(l + j - 1, j) for j in range(order // d + 1)}, order)


def lie_ranks_from_series(series: PowerSeries, order: Optional[int] = None) -> List[int]:
    """Recover l_1..l_order from the product formula, degree by degree."""
    order = series.order if order is None else min(order, series.order)
    if series[0] != 1:
        raise SeriesError(f"series must start with 1, got {series[0]}")
    ranks: List[int] = []
    current = polynomial({0: 1}, order)
    for d in range(1, order + 1):
        l = series[d] - current[d]
        if l < 0:
            raise SeriesError(f"negative Lie rank {l} in degree {d}")
        ranks.append(l)
        if l:
            current = current * _factor(d, l, order)
    return ranks


@dataclass(frozen=True)
class FactorizationReport:
    """Outcome of ``verify_factorization``."""
    factorization_exact: bool
    ranks_consistent: Optional[bool]
    m_ranks: Tuple[int, ...]
    e_ranks: Tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.factorization_exact and self.ranks_consistent is not False

    def rank_table(self) -> List[Tuple[int, int, int]]:
        return [(d, l, f) for d, (l, f) in enumerate(zip(self.m_ranks, self.e_ranks), start=1)]


def verify_factorization(k: int, n: int, order: int) -> FactorizationReport:
    """Check (1+t^m)(1-kt^m+t^{2m}) = E-denominator and f_d = l_d - δ_{d,m}."""
    m = n - 1
    width = max(order, 3 * m)
    lhs = polynomial({0: 1, m: 1}, width) * denominator(k, n, SeriesMode.M, width)
    rhs = denominator(k, n, SeriesMode.E, width)
    exact = lhs == rhs

    try:
        l_ranks = lie_ranks_from_series(quadratic_hilbert(k, n, order, SeriesMode.M))
        f_ranks = lie_ranks_from_series(quadratic_hilbert(k, n, order, SeriesMode.E))
    except SeriesError as e:
        logger.info("rank recovery unavailable for k=%d n=%d: %s", k, n, e)
        return FactorizationReport(exact, None, (), ())

    consistent = all(
        f == (l - 1 if d == m else l)
        for d, (l, f) in enumerate(zip(l_ranks, f_ranks), start=1)
    )
    return FactorizationReport(exact, consistent, tuple(l_ranks), tuple(f_ranks))
