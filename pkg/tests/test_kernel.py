"""Tests for kernel subgroups, the bounded pair search and the principal map scan."""
import pytest

from core.config import SearchConfig, config_manager
from core.exceptions import BasisMismatchError
from core.interfaces import SearchFamily
from homotopy.expressions import Alpha, Bracket, parse, scaled, total
from homotopy.hilton import normalize
from homotopy.kernel import bounded_search, in_kernel, kernel_subgroup, principal_map_scan
from homotopy.tables import integral_table


def _mu_expression(mu):
    return total([scaled(c, Alpha(i + 1)) for i, c in enumerate(mu) if c])


class TestKernelSubgroup:
    """Test membership in the span of [L, a_i] and L @ theta."""

    def test_corrected_cp2_pair(self):
        table = integral_table(2)
        K = kernel_subgroup(parse("eta1 - eta2"), table, 2)
        product = normalize(parse("[a1 + a2, eta2]"), table, 2)
        assert in_kernel(product, K) is not None

    def test_naive_cp2_pair(self):
        table = integral_table(2)
        K = kernel_subgroup(parse("eta1 - eta2"), table, 2)
        assert in_kernel(normalize(parse("[a1, [a1, a2]]"), table, 2), K) is None

    def test_hp2_pair(self):
        table = integral_table(4)
        K = kernel_subgroup(parse("nu1 - nu2"), table, 2)
        product = normalize(parse("[a1 - a2, nu2]"), table, 2)
        assert in_kernel(product, K) is not None

    def test_witness_reproduces_product(self):
        table = integral_table(4)
        K = kernel_subgroup(parse("[a1, a2]"), table, 2)
        product = normalize(parse("[a2, nu1]"), table, 2)
        witness = in_kernel(product, K)
        combination = K.basis.zero()
        for c, generator in zip(witness.coefficients, K.generators):
            combination = combination + generator.scale(c)
        assert combination == product
        assert set(witness.to_dict()) <= set(K.labels)

    def test_generators_are_members(self):
        table = integral_table(4)
        K = kernel_subgroup(parse("[a1, a2] + nup1"), table, 2)
        for v in K.generators:
            assert K.contains(v.coords)

    def test_basis_mismatch(self):
        table = integral_table(4)
        K = kernel_subgroup(parse("[a1, a2]"), table, 2)
        with pytest.raises(BasisMismatchError):
            in_kernel(normalize(parse("[a1, [a1, a2]]"), table, 3), K)


class TestBoundedSearch:
    """Test the exhaustive (mu, delta) search for k = 2."""

    def test_bound_zero_is_empty(self):
        report = bounded_search(integral_table(4), parse("[a1, a2]"), 0)
        assert report.empty
        assert report.examined_mu == 0
        assert "0 solution(s)" in report.summary()

    @pytest.mark.parametrize("bound", [-1, 21])
    def test_bound_outside_range(self, bound):
        with pytest.raises(ValueError):
            bounded_search(integral_table(4), parse("[a1, a2]"), bound)

    def test_bound_follows_config(self):
        config_manager.update_config(search=SearchConfig(kernel_search_bound=0))
        assert bounded_search(integral_table(4), parse("[a1, a2]")).bound == 0

    def test_solutions_are_certified(self):
        table = integral_table(4)
        L = parse("[a1, a2]")
        report = bounded_search(table, L, 1, SearchFamily.SPHERE, max_solutions=1)
        assert not report.empty
        assert report.truncated
        K = kernel_subgroup(L, table, 2)
        for solution in report.solutions:
            product = normalize(Bracket(_mu_expression(solution.mu), parse(solution.delta_expression)), table, 2)
            assert in_kernel(product, K) is not None
            assert next(c for c in solution.mu if c) > 0

    def test_n8_sphere_family_is_empty(self):
        for variant in ("plus", "minus"):
            report = bounded_search(integral_table(8, variant), parse("sigma1 - sigma2"), 1, SearchFamily.SPHERE)
            assert report.empty
            assert report.examined_mu == 4
            assert "exhaustive" in report.summary()

    def test_default_family_is_full(self):
        report = bounded_search(integral_table(8), parse("sigma1 - sigma2"), 0)
        assert report.family is SearchFamily.FULL
        assert "family=full" in report.summary()

    @pytest.mark.parametrize("variant", ["plus", "minus"])
    def test_n8_pair_class_delta_lies_in_kernel(self, variant):
        table = integral_table(8, variant)
        K = kernel_subgroup(parse("sigma1 - sigma2"), table, 2)
        product = normalize(parse("[a1 - a2, sigma1 - [a1, a2]]"), table, 2)
        assert in_kernel(product, K) is not None

    @pytest.mark.parametrize("variant", ["plus", "minus"])
    def test_n8_full_family_finds_pair(self, variant):
        table = integral_table(8, variant)
        report = bounded_search(table, parse("sigma1 - sigma2"), 1, SearchFamily.FULL)
        assert not report.empty
        assert (1, -1) in {solution.mu for solution in report.solutions}
        K = kernel_subgroup(parse("sigma1 - sigma2"), table, 2)
        for solution in report.solutions:
            product = normalize(Bracket(_mu_expression(solution.mu), parse(solution.delta_expression)), table, 2)
            assert in_kernel(product, K) is not None

    @pytest.mark.parametrize("variant", ["plus", "minus"])
    def test_n8_sphere_family_is_empty_at_default_bound(self, variant):
        report = bounded_search(integral_table(8, variant), parse("sigma1 - sigma2"), 5, SearchFamily.SPHERE)
        assert report.empty
        assert report.bound == 5
        assert "exhaustive" in report.summary()


class TestPrincipalScan:
    """Test the scan for maps to the classifying space."""

    def test_no_primitive_solution(self):
        scan = principal_map_scan(integral_table(4), parse("[a1, a2] + nup1 + nup2"), 2, 3)
        assert scan.solutions == []
        assert scan.modulus == 12

    def test_pair_has_solution(self):
        scan = principal_map_scan(integral_table(4), parse("[a1, a2]"), 2, 1)
        assert (1, 0) in scan.solutions
        assert scan.examined == 4

    def test_trivial_modulus(self):
        scan = principal_map_scan(integral_table(2), parse("eta1 - eta2"), 2, 1)
        assert len(scan.solutions) == scan.examined == 4
