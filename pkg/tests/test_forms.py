"""Tests for unimodular forms, basis changes and the vector searches."""
import pytest

from algebra.forms import (
    BasisChange,
    SymForm,
    characteristic_basis,
    characteristic_vector,
    diagonalize_mod_p,
    extend_to_basis,
    find_primitive_divisible,
    is_primitive,
    iter_small_vectors,
    random_equivalent_form,
    search_vector,
)
from algebra.ring import IntMatrix
from core.exceptions import FormError


class TestSymForm:
    """Test the symmetric form value type."""

    def test_rejects_asymmetric(self):
        with pytest.raises(FormError):
            SymForm.from_rows([[1, 2], [3, 1]])

    def test_hyperbolic_is_even_unimodular(self):
        H = SymForm.hyperbolic(2)
        assert H.rank == 4
        assert H.is_even()
        assert H.det() == 1

    def test_require_unimodular(self):
        with pytest.raises(FormError):
            SymForm.diagonal([2, 1]).require_unimodular()

    def test_inverse_and_direct_sum(self):
        g = SymForm.from_rows([[2, 1], [1, 1]])
        assert (g.matrix @ g.inverse().matrix).tolist() == [[1, 0], [0, 1]]
        assert g.direct_sum(SymForm.identity(1)).tolist() == [[2, 1, 0], [1, 1, 0], [0, 0, 1]]

    def test_random_equivalent_form_keeps_invariants(self, rng):
        for seed in (SymForm.hyperbolic(2), SymForm.diagonal([1, 1, -1])):
            for _ in range(10):
                h = random_equivalent_form(seed, rng)
                assert h.det() == seed.det()
                assert h.is_even() == seed.is_even()


class TestBasisChange:
    """Test basis changes and their dual action."""

    def test_rejects_non_unimodular(self):
        with pytest.raises(FormError):
            BasisChange(IntMatrix.from_rows([[2, 0], [0, 1]], 2))

    def test_dual_basis_pairs_to_identity(self):
        P = BasisChange.from_columns([(2, 1), (1, 1)])
        assert (P.dual_basis().transpose() @ P.matrix).tolist() == [[1, 0], [0, 1]]
        assert P.substitution().tolist() == P.matrix.transpose().tolist()

    def test_then_composes(self):
        P = BasisChange.from_columns([(1, 0), (1, 1)])
        Q = BasisChange.from_columns([(0, 1), (1, 0)])
        assert P.then(Q).matrix.tolist() == (P.matrix @ Q.matrix).tolist()
        assert P.then(P.inverse()).is_identity()


class TestVectorSearch:
    """Test enumeration order and the searches built on it."""

    def test_enumeration_order(self):
        assert list(iter_small_vectors(2, 1)) == [
            (0, 1), (0, -1), (1, 0), (1, 1), (1, -1), (-1, 0), (-1, 1), (-1, -1)
        ]

    def test_enumeration_by_shell(self):
        norms = [max(abs(x) for x in v) for v in iter_small_vectors(3, 3)]
        assert norms == sorted(norms)

    def test_search_skips_imprimitive(self):
        assert search_vector(2, lambda v: v[1] == 0 and v[0] > 1, 3) is None
        assert search_vector(2, lambda v: v[0] == 2, 3) == (2, 1)

    def test_search_inside_lattice(self):
        v = search_vector(2, lambda v: True, 2, lattice=[(1, 1), (0, 3)])
        assert (v[1] - v[0]) % 3 == 0
        assert is_primitive(v)


class TestPrimitiveDivisible:
    """Test primitive vectors of norm divisible by 3 or 8."""

    def test_basis_path(self):
        found = find_primitive_divisible(SymForm.from_rows([[1, 0, 0], [0, 3, 1], [0, 1, 0]]), 3)
        assert found.path == "basis"
        assert found.vector == (0, 1, 0)
        assert found.norm == 3

    def test_f3_path_on_identity(self):
        found = find_primitive_divisible(SymForm.identity(3), 3)
        assert found.path == "f3-lift"
        assert found.norm % 3 == 0
        assert is_primitive(found.vector)

    def test_divisible_by_eight(self):
        g = SymForm.identity(5)
        found = find_primitive_divisible(g, 8)
        assert found.norm % 8 == 0
        assert g.norm(found.vector) == found.norm
        assert is_primitive(found.vector)

    def test_random_forms_of_rank_three(self, rng):
        seeds = [SymForm.diagonal([1, 1, -1]), SymForm.identity(3), SymForm.diagonal([1, -1, -1])]
        for _ in range(100):
            g = random_equivalent_form(rng.choice(seeds), rng)
            found = find_primitive_divisible(g, 3)
            assert g.norm(found.vector) == found.norm
            assert found.norm % 3 == 0
            assert is_primitive(found.vector)

    def test_random_forms_of_rank_five(self, rng):
        seeds = [SymForm.identity(5), SymForm.diagonal([1, 1, 1, 1, -1]), SymForm.diagonal([1, 1, 1, -1, -1])]
        for _ in range(100):
            g = random_equivalent_form(rng.choice(seeds), rng, steps=6)
            found = find_primitive_divisible(g, 8)
            assert g.norm(found.vector) == found.norm
            assert found.norm % 8 == 0
            assert is_primitive(found.vector)

    def test_rank_too_small(self):
        with pytest.raises(FormError):
            find_primitive_divisible(SymForm.identity(2), 3)
        with pytest.raises(FormError):
            find_primitive_divisible(SymForm.identity(4), 8)

    def test_bad_modulus(self):
        with pytest.raises(FormError):
            find_primitive_divisible(SymForm.identity(5), 5)


class TestBasisExtension:
    """Test extension of a primitive vector to a basis."""

    @pytest.mark.parametrize("v", [(1,), (2, 3), (2, 3, 5), (6, 10, 15), (0, 0, -1), (4, 0, 7, 9)])
    def test_last_column(self, v):
        P = extend_to_basis(v)
        assert P.last_column == v
        assert P.matrix.is_unimodular()

    def test_rejects_imprimitive(self):
        with pytest.raises(FormError):
            extend_to_basis((2, 4))


class TestModPDiagonalization:
    """Test congruence diagonalization over F_p."""

    def test_diagonalizes(self, rng):
        for _ in range(10):
            g = random_equivalent_form(SymForm.hyperbolic(2), rng)
            result = diagonalize_mod_p(g, 3)
            D = g.transform(result.matrix).tolist()
            for i in range(4):
                for j in range(4):
                    if i != j:
                        assert D[i][j] % 3 == 0
                assert D[i][i] % 3 == result.diagonal[i]

    def test_rejects_two(self):
        with pytest.raises(FormError):
            diagonalize_mod_p(SymForm.identity(2), 2)


class TestCharacteristic:
    """Test characteristic vectors."""

    def test_odd_form(self):
        g = SymForm.diagonal([1, 1, -1])
        w = characteristic_vector(g)
        assert w == (1, 1, 1)
        basis = characteristic_basis(g)
        assert basis.change.last_column == (1, 1, 1)

    def test_even_form_keeps_identity(self):
        basis = characteristic_basis(SymForm.hyperbolic(1))
        assert basis.vector == (0, 0)
        assert basis.change.is_identity()

    def test_characteristic_property(self, rng):
        for _ in range(10):
            g = random_equivalent_form(SymForm.diagonal([1, -1, 1]), rng)
            w = characteristic_vector(g)
            for i in range(3):
                x = tuple(int(i == j) for j in range(3))
                assert (g.value(x, w) - g.norm(x)) % 2 == 0
