"""Formal Whitehead-product expressions.

Text syntax::

    a1            wedge summand inclusion alpha_1
    nu2, nup1     a named class of pi_{2n-1}(S^n) (or pi_{3n-2}(S^n)) on a sphere
    [x, y]        Whitehead product
    x @ nu7       composition with a named class
    3*x, 1/2*x    integer or rational multiples
    x + y - z     sums, with parentheses for grouping
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from algebra.ring import INTEGERS, PrimeSet
from algebra.tensorlie import GradedBasis, TensorElement, bracket
from core.exceptions import NoApplicableRuleError, ProblemInputError


@dataclass(frozen=True)
class Alpha:
    index: int


@dataclass(frozen=True)
class Named:
    name: str
    index: int


@dataclass(frozen=True)
class Scaled:
    coefficient: Fraction
    expr: "WhiteheadExpr"


@dataclass(frozen=True)
class Sum:
    terms: Tuple["WhiteheadExpr", ...]


@dataclass(frozen=True)
class Bracket:
    left: "WhiteheadExpr"
    right: "WhiteheadExpr"


@dataclass(frozen=True)
class Compose:
    expr: "WhiteheadExpr"
    klass: str


WhiteheadExpr = Union[Alpha, Named, Scaled, Sum, Bracket, Compose]

ZERO = Sum(())


def scaled(c: Union[int, Fraction], e: WhiteheadExpr) -> WhiteheadExpr:
    c = Fraction(c)
    if c == 1:
        return e
    return Scaled(c, e)


def total(terms: Sequence[WhiteheadExpr]) -> WhiteheadExpr:
    """Sum of the terms, dropping zero multiples."""
    kept = tuple(t for t in terms if not (isinstance(t, Scaled) and t.coefficient == 0))
    if len(kept) == 1:
        return kept[0]
    return Sum(kept)


def linear(coefficients: Mapping[WhiteheadExpr, Union[int, Fraction]]) -> WhiteheadExpr:
    return total([scaled(c, e) for e, c in coefficients.items() if c])


def pair(i: int, j: int) -> Bracket:
    return Bracket(Alpha(i), Alpha(j))


# Degrees -------------------------------------------------------------------

def expr_degree(e: WhiteheadExpr, n: int, middle: Sequence[str], top: Sequence[str] = ()) -> int:
    """Degree of e given the names of the middle and top generators on a sphere.

    Compositions x @ c with x of degree n raise to 2n-1; with x of degree 2n-1
    to 3n-2.
    """
    if isinstance(e, Alpha):
        return n
    if isinstance(e, Named):
        if e.name in middle:
            return 2 * n - 1
        if e.name in top:
            return 3 * n - 2
        raise NoApplicableRuleError(f"unknown class {e.name!r}", render(e))
    if isinstance(e, Scaled):
        return expr_degree(e.expr, n, middle, top)
    if isinstance(e, Sum):
        degrees = {expr_degree(t, n, middle, top) for t in e.terms}
        if len(degrees) > 1:
            raise NoApplicableRuleError(f"sum mixes degrees {sorted(degrees)}", render(e))
        return degrees.pop() if degrees else 2 * n - 1
    if isinstance(e, Bracket):
        return expr_degree(e.left, n, middle, top) + expr_degree(e.right, n, middle, top) - 1
    if isinstance(e, Compose):
        inner = expr_degree(e.expr, n, middle, top)
        if inner == n:
            return 2 * n - 1
        if inner == 2 * n - 1:
            return 3 * n - 2
        raise NoApplicableRuleError(f"no composition out of degree {inner}", render(e))
    raise TypeError(f"not an expression: {e!r}")


def alpha_indices(e: WhiteheadExpr) -> List[int]:
    if isinstance(e, (Alpha, Named)):
        return [e.index]
    if isinstance(e, (Scaled, Compose)):
        return alpha_indices(e.expr)
    if isinstance(e, Sum):
        return [i for t in e.terms for i in alpha_indices(t)]
    if isinstance(e, Bracket):
        return alpha_indices(e.left) + alpha_indices(e.right)
    raise TypeError(f"not an expression: {e!r}")


# Rendering -----------------------------------------------------------------

def _coefficient_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render(e: WhiteheadExpr) -> str:
    """Canonical text form; parse(render(e)) gives back an equal tree up to signs."""
    if isinstance(e, Alpha):
        return f"a{e.index}"
    if isinstance(e, Named):
        return f"{e.name}{e.index}"
    if isinstance(e, Bracket):
        return f"[{render(e.left)}, {render(e.right)}]"
    if isinstance(e, Compose):
        inner = render(e.expr)
        if isinstance(e.expr, (Sum, Scaled)):
            inner = f"({inner})"
        return f"{inner} @ {e.klass}"
    if isinstance(e, Scaled):
        inner = render(e.expr)
        if isinstance(e.expr, Sum):
            inner = f"({inner})"
        if e.coefficient == -1:
            return f"-{inner}"
        return f"{_coefficient_text(e.coefficient)}*{inner}"
    if isinstance(e, Sum):
        if not e.terms:
            return "0"
        out = render(e.terms[0])
        for t in e.terms[1:]:
            text = render(t)
            out += f" - {text[1:]}" if text.startswith("-") else f" + {text}"
        return out
    raise TypeError(f"not an expression: {e!r}")


# Parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ident>[A-Za-z_]+)(?P<idx>\d+)?|(?P<op>[\[\](),@*+\-]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, Optional[str]]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m or m.end() == pos:
                raise ProblemInputError(f"cannot parse expression {text!r} at position {pos}")
            if m.group("num"):
                self.tokens.append(("num", m.group("num"), None))
            elif m.group("ident"):
                self.tokens.append(("ident", m.group("ident"), m.group("idx")))
            else:
                self.tokens.append(("op", m.group("op"), None))
            pos = m.end()
        self.pos = 0

    def peek(self) -> Optional[Tuple[str, str, Optional[str]]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, value: Optional[str] = None) -> Tuple[str, str, Optional[str]]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            raise ProblemInputError(f"expected {value or 'token'} in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> WhiteheadExpr:
        e = self.expression()
        if self.peek() is not None:
            raise ProblemInputError(f"trailing input in {self.text!r}")
        return e

    def expression(self) -> WhiteheadExpr:
        terms = [self.term()]
        while self.peek() is not None and self.peek()[1] in "+-":
            sign = self.take()[1]
            t = self.term()
            terms.append(scaled(-1, t) if sign == "-" else t)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> WhiteheadExpr:
        negate = False
        if self.peek() is not None and self.peek()[1] == "-":
            self.take()
            negate = True
        coefficient = Fraction(1)
        tok = self.peek()
        if tok is not None and tok[0] == "num":
            coefficient = Fraction(self.take()[1])
            if self.peek() is not None and self.peek()[1] == "*":
                self.take()
        e = self.factor()
        if negate:
            coefficient = -coefficient
        return scaled(coefficient, e)

    def factor(self) -> WhiteheadExpr:
        e = self.atom()
        while self.peek() is not None and self.peek()[1] == "@":
            self.take()
            kind, name, idx = self.take()
            if kind != "ident":
                raise ProblemInputError(f"composition needs a class name in {self.text!r}")
            e = Compose(e, name + (idx or ""))
        return e

    def atom(self) -> WhiteheadExpr:
        kind, value, idx = self.take()
        if kind == "ident":
            if idx is None:
                raise ProblemInputError(f"{value!r} needs a sphere index in {self.text!r}")
            index = int(idx)
            if index < 1:
                raise ProblemInputError(f"sphere indices start at 1, got {value}{idx}")
            return Alpha(index) if value == "a" else Named(value, index)
        if value == "[":
            left = self.expression()
            self.take(",")
            right = self.expression()
            self.take("]")
            return Bracket(left, right)
        if value == "(":
            e = self.expression()
            self.take(")")
            return e
        raise ProblemInputError(f"unexpected {value!r} in {self.text!r}")


def parse(text: str) -> WhiteheadExpr:
    """Parse the text syntax into an expression tree."""
    if not text or not text.strip():
        raise ProblemInputError("empty expression")
    if text.strip() == "0":
        return ZERO
    return _Parser(text).parse()


# Loop homology images --------------------------------------------------------

def loop_basis(k: int, n: int) -> GradedBasis:
    """Generators a_1..a_k of H_{n-1}(ΩM)."""
    return GradedBasis.uniform(k, n - 1, prefix="a")


def rho(e: WhiteheadExpr, k: int, n: int, hopf: Mapping[str, int], ring: PrimeSet = INTEGERS) -> TensorElement:
    """Image in loop homology of a class of degree n or 2n-1.

    rho(a_i) = a_i, rho([x, y]) = -[rho x, rho y] on degree-n classes, a named
    class of Hopf invariant h on sphere i goes to -h a_i⊗a_i and
    rho(x @ c) = -h(c) rho(x)⊗rho(x). Classes absent from ``hopf`` have no
    rule.
    """
    basis = loop_basis(k, n)

    def walk(x: WhiteheadExpr) -> Tuple[TensorElement, int]:
        if isinstance(x, Alpha):
            if not 1 <= x.index <= k:
                raise NoApplicableRuleError(f"alpha index {x.index} outside 1..{k}", render(x))
            return TensorElement.generator(basis, x.index - 1, ring), n
        if isinstance(x, Named):
            if x.name not in hopf:
                raise NoApplicableRuleError(f"no loop homology image for {x.name}", render(x))
            a = TensorElement.generator(basis, x.index - 1, ring)
            return (a * a).scale(-hopf[x.name]), 2 * n - 1
        if isinstance(x, Scaled):
            inner, d = walk(x.expr)
            return inner.scale(x.coefficient), d
        if isinstance(x, Sum):
            acc = TensorElement.zero(basis, ring)
            degree = 2 * n - 1
            for t in x.terms:
                part, degree = walk(t)
                acc = acc + part
            return acc, degree
        if isinstance(x, Bracket):
            left, dl = walk(x.left)
            right, dr = walk(x.right)
            if dl != n or dr != n:
                raise NoApplicableRuleError("loop images only for brackets of degree-n classes", render(x))
            return bracket(left, right).scale(-1), 2 * n - 1
        if isinstance(x, Compose):
            inner, d = walk(x.expr)
            if d != n:
                raise NoApplicableRuleError("loop images only for compositions out of degree n", render(x))
            if x.klass not in hopf:
                raise NoApplicableRuleError(f"no Hopf invariant known for {x.klass}", render(x))
            return (inner * inner).scale(-hopf[x.klass]), 2 * n - 1
        raise TypeError(f"not an expression: {x!r}")

    value, _ = walk(e)
    return value


def coefficient_map(e: WhiteheadExpr) -> Dict[str, Fraction]:
    """Flatten a linear combination of atoms into {rendered atom: coefficient}."""
    out: Dict[str, Fraction] = {}

    def walk(x: WhiteheadExpr, c: Fraction) -> None:
        if isinstance(x, Scaled):
            walk(x.expr, c * x.coefficient)
        elif isinstance(x, Sum):
            for t in x.terms:
                walk(t, c)
        else:
            key = render(x)
            out[key] = out.get(key, Fraction(0)) + c

    walk(e, Fraction(1))
    return {key: c for key, c in out.items() if c}
