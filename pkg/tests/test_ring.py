"""Tests for localized scalars and integer matrix normal forms."""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebra.ring import (
    INTEGERS,
    IntMatrix,
    LocalScalar,
    PrimeSet,
    integer_kernel,
    is_unit,
    lattice_basis,
    matrix_rank,
    scalar_arith,
    smith_normal_form,
    solve_linear,
    spans_free_module,
)
from core.exceptions import RingError

small_matrices = st.integers(min_value=1, max_value=4).flatmap(
    lambda m: st.integers(min_value=1, max_value=4).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(min_value=-6, max_value=6), min_size=n, max_size=n),
            min_size=m,
            max_size=m,
        ).map(lambda rows: IntMatrix.from_rows(rows, n))
    )
)


class TestPrimeSet:
    """Test the set of inverted primes."""

    def test_rejects_composite(self):
        with pytest.raises(RingError):
            PrimeSet((2, 4))

    def test_rejects_unsorted(self):
        with pytest.raises(RingError):
            PrimeSet((3, 2))

    def test_of_sorts_and_deduplicates(self):
        assert PrimeSet.of([5, 2, 5]).primes == (2, 5)

    def test_strip_and_supports(self):
        S = PrimeSet.of([2, 3])
        assert S.strip(-72) == -1
        assert S.strip(60) == 5
        assert S.supports(12)
        assert not S.supports(10)
        assert not S.supports(0)

    def test_union(self):
        assert PrimeSet.of([3]).union(PrimeSet.of([2])).primes == (2, 3)


class TestLocalScalar:
    """Test arithmetic in Z[1/S]."""

    def test_denominator_outside_ring(self):
        with pytest.raises(RingError):
            LocalScalar(Fraction(1, 3), PrimeSet.of([2]))

    def test_inverse_of_unit(self):
        x = LocalScalar(4, PrimeSet.of([2]))
        assert is_unit(x)
        assert x.inverse().value == Fraction(1, 4)

    def test_inverse_of_non_unit(self):
        with pytest.raises(RingError):
            LocalScalar(3, PrimeSet.of([2])).inverse()

    def test_integers_units_are_signs(self):
        assert is_unit(LocalScalar(-1))
        assert not is_unit(LocalScalar(2))

    def test_ring_mismatch(self):
        with pytest.raises(RingError):
            LocalScalar(1, PrimeSet.of([2])) + LocalScalar(1, PrimeSet.of([3]))

    def test_arithmetic(self):
        S = PrimeSet.of([2])
        x = LocalScalar(Fraction(1, 2), S)
        assert (x + 1).value == Fraction(3, 2)
        assert (x * 4).value == 2
        assert (-x).value == Fraction(-1, 2)
        assert (1 - x).value == Fraction(1, 2)

    @pytest.mark.parametrize("op,expected", [("add", Fraction(5, 6)), ("sub", Fraction(1, 6)), ("mul", Fraction(1, 6))])
    def test_scalar_arith(self, op, expected):
        S = PrimeSet.of([2, 3])
        assert scalar_arith(LocalScalar("1/2", S), LocalScalar("1/3", S), op).value == expected

    def test_scalar_arith_rejects_unknown_op(self):
        with pytest.raises(ValueError):
            scalar_arith(LocalScalar(1), LocalScalar(2), "div")


class TestSmithNormalForm:
    """Test the Smith normal form and the solvers built on it."""

    @given(small_matrices)
    @settings(max_examples=60, deadline=None)
    def test_transform_identity_and_divisibility(self, A):
        snf = smith_normal_form(A)
        assert (snf.U @ A @ snf.V).tolist() == snf.D.tolist()
        assert snf.U.is_unimodular() and snf.V.is_unimodular()
        diagonal = [abs(d) for d in snf.diagonal]
        nonzero = [d for d in diagonal if d]
        for a, b in zip(nonzero, nonzero[1:]):
            assert b % a == 0

    def test_known_invariants(self):
        A = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], 3)
        assert [abs(d) for d in smith_normal_form(A).diagonal] == [2, 6, 12]

    def test_solve_over_integers_and_localization(self):
        A = [[2, 0], [0, 3]]
        assert solve_linear(A, [1, 3], INTEGERS) is None
        solution = solve_linear(A, [1, 3], PrimeSet.of([2]))
        assert [s.value for s in solution] == [Fraction(1, 2), 1]

    def test_inconsistent_system(self):
        assert solve_linear([[1, 1], [1, 1]], [0, 1]) is None

    def test_integer_kernel(self):
        A = IntMatrix.from_rows([[1, 2, 3]], 3)
        kernel = integer_kernel(A)
        assert len(kernel) == 2
        for v in kernel:
            assert A.apply(v) == (0,)

    def test_lattice_basis_of_dependent_generators(self):
        basis = lattice_basis([(2, 0), (0, 2), (2, 2)], 2)
        assert len(basis) == 2
        assert abs(IntMatrix.from_columns(basis).det()) == 4

    def test_rank_and_free_module(self):
        assert matrix_rank([[1, 2], [2, 4]], 2) == 1
        assert spans_free_module([[2, 0], [0, 1]], PrimeSet.of([2]), 2)
        assert not spans_free_module([[2, 0], [0, 1]], INTEGERS, 2)
        assert not spans_free_module([[1, 0]], INTEGERS, 2)

    def test_inverse_of_unimodular(self):
        M = IntMatrix.from_rows([[2, 1], [1, 1]], 2)
        assert (M @ M.inverse()).tolist() == [[1, 0], [0, 1]]
