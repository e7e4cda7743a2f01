"""Exact multivariate polynomials over rational coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from app.utils.exceptions import ContractViolation


Number = Union[int, Fraction]


@dataclass(frozen=True, order=True)
class Monomial:
    """
    Product of variables with positive exponents.

    ``factors`` is sorted by variable id; the empty tuple is the constant
    monomial.
    """

    factors: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def of(cls, *var_ids: int) -> "Monomial":
        """Build from a list of variable ids, repeated ids raise the exponent."""
        powers: Dict[int, int] = {}
        for v in var_ids:
            powers[v] = powers.get(v, 0) + 1
        return cls.from_powers(powers)

    @classmethod
    def from_powers(cls, powers: Mapping[int, int]) -> "Monomial":
        for v, e in powers.items():
            if e < 1:
                raise ContractViolation(f"exponent of v{v} must be positive, got {e}")
        return cls(tuple(sorted(powers.items())))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(v for v, _ in self.factors)

    @property
    def is_constant(self) -> bool:
        return not self.factors

    @property
    def is_linear(self) -> bool:
        return self.degree <= 1

    def exponent(self, var: int) -> int:
        for v, e in self.factors:
            if v == var:
                return e
        return 0

    def without(self, var: int) -> "Monomial":
        return Monomial(tuple((v, e) for v, e in self.factors if v != var))

    def __mul__(self, other: "Monomial") -> "Monomial":
        powers = dict(self.factors)
        for v, e in other.factors:
            powers[v] = powers.get(v, 0) + e
        return Monomial(tuple(sorted(powers.items())))

    def evaluate(self, values: Mapping[int, Fraction]) -> Fraction:
        result = Fraction(1)
        for v, e in self.factors:
            try:
                result *= values[v] ** e
            except KeyError:
                raise ContractViolation(f"no value for v{v}") from None
        return result

    def pure_square_of(self) -> Optional[int]:
        """Return V when the monomial is exactly V^2."""
        if len(self.factors) == 1 and self.factors[0][1] == 2:
            return self.factors[0][0]
        return None

    def to_str(self, name: Callable[[int], str]) -> str:
        if not self.factors:
            return "1"
        parts = []
        for v, e in self.factors:
            parts.append(name(v) if e == 1 else f"{name(v)}^{e}")
        return "*".join(parts)


ONE = Monomial()


class Polynomial:
    """
    Immutable map from monomials to non-zero rational coefficients.

    Equality and hashing are structural, so polynomials can key atoms.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Number]] = None):
        cleaned: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    cleaned[m] = c
        self._terms = cleaned
        self._hash: Optional[int] = None

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        return cls({ONE: value})

    @classmethod
    def var(cls, var_id: int, coeff: Number = 1) -> "Polynomial":
        return cls({Monomial(((var_id, 1),)): coeff})

    @classmethod
    def monomial(cls, mono: Monomial, coeff: Number = 1) -> "Polynomial":
        return cls({mono: coeff})

    @classmethod
    def linear(cls, coeffs: Mapping[int, Number], constant: Number = 0) -> "Polynomial":
        terms: Dict[Monomial, Number] = {Monomial(((v, 1),)): c for v, c in coeffs.items()}
        terms[ONE] = constant
        return cls(terms)

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items()))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(m.is_constant for m in self._terms)

    @property
    def degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    @property
    def is_linear(self) -> bool:
        return self.degree <= 1

    @property
    def variables(self) -> Tuple[int, ...]:
        seen = set()
        for m in self._terms:
            seen.update(m.variables)
        return tuple(sorted(seen))

    def monomials(self) -> Iterable[Monomial]:
        return self._terms.keys()

    def nonlinear_monomials(self) -> Iterable[Monomial]:
        return [m for m in sorted(self._terms) if m.degree > 1]

    def linear_coefficients(self) -> Dict[int, Fraction]:
        """Coefficients of the degree-one terms, keyed by variable."""
        return {m.factors[0][0]: c for m, c in self._terms.items() if m.degree == 1}

    def __add__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return Polynomial(terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        return self + (-other)

    def __rsub__(self, other: Number) -> "Polynomial":
        return Polynomial.constant(other) - self

    def scale(self, factor: Number) -> "Polynomial":
        factor = Fraction(factor)
        if factor == 0:
            return Polynomial()
        return Polynomial({m: c * factor for m, c in self._terms.items()})

    def __mul__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        terms: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                terms[m] = terms.get(m, Fraction(0)) + c1 * c2
        return Polynomial(terms)

    __rmul__ = __mul__

    def map_monomials(self, fn: Callable[[Monomial], "Polynomial"]) -> "Polynomial":
        """Replace every monomial by a polynomial and sum up."""
        result = Polynomial()
        for m, c in self._terms.items():
            result = result + fn(m).scale(c)
        return result

    def evaluate(self, values: Mapping[int, Fraction]) -> Fraction:
        return sum((c * m.evaluate(values) for m, c in self._terms.items()), Fraction(0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def to_str(self, name: Callable[[int], str] = lambda v: f"v{v}") -> str:
        if not self._terms:
            return "0"
        out = []
        for m, c in sorted(self._terms.items(), key=lambda t: (-t[0].degree, t[0])):
            body = m.to_str(name)
            if m.is_constant:
                text = str(abs(c))
            elif abs(c) == 1:
                text = body
            else:
                text = f"{abs(c)}*{body}"
            sign = "-" if c < 0 else "+"
            out.append((sign, text))
        first_sign, first = out[0]
        parts = [f"-{first}" if first_sign == "-" else first]
        parts.extend(f"{s} {t}" for s, t in out[1:])
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()})"


def poly_arith(op: str, lhs: Polynomial, rhs: Union[Polynomial, Number]) -> Polynomial:
    """
    Apply ``add``, ``scale`` or ``multiply``.

    Args:
        op: Operation name
        lhs: Left operand
        rhs: Polynomial, or a rational for ``scale``

    Returns:
        Exact result
    """
    if op == "add":
        return lhs + rhs
    if op == "scale":
        if isinstance(rhs, Polynomial):
            raise ContractViolation("scale expects a rational factor")
        return lhs.scale(rhs)
    if op == "multiply":
        return lhs * rhs
    raise ContractViolation(f"unknown polynomial operation '{op}'")


def eval_poly(p: Polynomial, model: Mapping[int, Fraction]) -> Fraction:
    """Exact value of ``p``; a variable without value raises ContractViolation."""
    return p.evaluate(model)


def eval_monomial_at(q: Monomial, var: int, k: int) -> Polynomial:
    """Substitute ``var := k`` in ``q``."""
    e = q.exponent(var)
    if e == 0:
        raise ContractViolation(f"v{var} does not occur in monomial")
    coeff = Fraction(k) ** e
    return Polynomial.monomial(q.without(var), coeff)
