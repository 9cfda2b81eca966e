"""Tests for the Whitehead expression syntax and loop homology images."""
from fractions import Fraction

import pytest

from algebra.tensorlie import TensorElement
from core.exceptions import NoApplicableRuleError, ProblemInputError
from homotopy.expressions import (
    ZERO,
    Alpha,
    Bracket,
    Compose,
    Named,
    Scaled,
    Sum,
    coefficient_map,
    expr_degree,
    loop_basis,
    pair,
    parse,
    render,
    rho,
    total,
)


class TestParse:
    """Test the text syntax."""

    def test_sum_with_multiple(self):
        e = parse("3*[a1, a2] - nu2")
        assert e == Sum((Scaled(Fraction(3), pair(1, 2)), Scaled(Fraction(-1), Named("nu", 2))))
        assert render(e) == "3*[a1, a2] - nu2"

    def test_leading_minus(self):
        assert parse("-a1") == Scaled(Fraction(-1), Alpha(1))
        assert render(parse("-a1")) == "-a1"

    def test_composition(self):
        e = parse("([a1, a2] + nup1) @ nu7")
        assert isinstance(e, Compose)
        assert e.klass == "nu7"
        assert render(e) == "([a1, a2] + nup1) @ nu7"

    def test_composition_with_middle_generator(self):
        assert parse("(a1 + a2) @ nu") == Compose(Sum((Alpha(1), Alpha(2))), "nu")

    def test_rational_coefficient(self):
        e = parse("1/2*[a1, a1]")
        assert e == Scaled(Fraction(1, 2), pair(1, 1))
        assert render(e) == "1/2*[a1, a1]"

    def test_nested_bracket(self):
        assert parse("[a1, [a1, a2]]") == Bracket(Alpha(1), pair(1, 2))

    def test_zero(self):
        assert parse("0") is ZERO
        assert render(ZERO) == "0"

    @pytest.mark.parametrize("text", ["", "   ", "a", "a0", "[a1 a2]", "a1 +", "a1 $", "[a1, a2", "a1 @ 3"])
    def test_rejects(self, text):
        with pytest.raises(ProblemInputError):
            parse(text)

    @pytest.mark.parametrize("text", ["[a1, a2] + nup1 + nup2", "nu1 - nu2", "2*[a1, a2] @ nu7", "[a2, nu1]"])
    def test_render_is_stable(self, text):
        assert render(parse(render(parse(text)))) == render(parse(text))

    def test_total_drops_zero_multiples(self):
        assert total([Scaled(Fraction(0), Alpha(1)), Alpha(2)]) == Alpha(2)

    def test_coefficient_map(self):
        assert coefficient_map(parse("2*nu1 - nu1 + [a1, a2] - nup2 + nup2")) == {
            "nu1": Fraction(1),
            "[a1, a2]": Fraction(1),
        }


class TestDegrees:
    """Test degree bookkeeping."""

    def test_degrees_for_n4(self):
        middle = ["nu", "nup"]
        top = ["x", "y"]
        assert expr_degree(parse("a1"), 4, middle) == 4
        assert expr_degree(parse("[a1, a2]"), 4, middle) == 7
        assert expr_degree(parse("[a1, [a1, a2]]"), 4, middle) == 10
        assert expr_degree(parse("nu1 @ nu7"), 4, middle) == 10
        assert expr_degree(parse("x1"), 4, middle, top) == 10

    def test_mixed_sum(self):
        with pytest.raises(NoApplicableRuleError):
            expr_degree(parse("a1 + nu1"), 4, ["nu"])


class TestRho:
    """Test loop homology images."""

    def test_pair(self):
        basis = loop_basis(2, 4)
        a1, a2 = (TensorElement.generator(basis, i) for i in range(2))
        assert rho(pair(1, 2), 2, 4, {}) == -(a1 * a2 + a2 * a1)

    def test_hopf_class(self):
        basis = loop_basis(2, 4)
        a1 = TensorElement.generator(basis, 0)
        assert rho(Named("nu", 1), 2, 4, {"nu": 1, "nup": 0}) == -(a1 * a1)
        assert rho(Named("nup", 1), 2, 4, {"nu": 1, "nup": 0}).is_zero()

    def test_composition_out_of_degree_n(self):
        basis = loop_basis(2, 2)
        a1, a2 = (TensorElement.generator(basis, i) for i in range(2))
        e = Compose(Sum((Alpha(1), Alpha(2))), "eta")
        assert rho(e, 2, 2, {"eta": 1}) == -((a1 + a2) * (a1 + a2))

    def test_unknown_class(self):
        with pytest.raises(NoApplicableRuleError):
            rho(Named("omega", 1), 2, 10, {})

    def test_alpha_out_of_range(self):
        with pytest.raises(NoApplicableRuleError):
            rho(pair(1, 3), 2, 4, {})
