"""
Exists-forall problems over integer parameters and real universals.

Each clause with universal variables is replaced by the conditions under
which its negation, a linear system in y, is infeasible (Motzkin's
transposition theorem). The result is a Max-SMT problem over the
existential variables and fresh real multipliers, solved by the
non-linear engine.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from app.models.base import OriginKind, VarOrigin, VarSort, VarTable
from app.models.ea import EaProblem, MotzkinRow, MotzkinSystem, Passthrough
from app.models.formula import (
    Clause,
    Literal,
    Model,
    Relation,
    Weight,
    WeightedClause,
    WeightedFormula,
    clause_holds,
    make_atom,
    make_clause,
    negate_atom,
)
from app.models.polynomial import Monomial, Polynomial
from app.models.results import NiaResult, Status
from app.services.nia_engine import solve_maxsmt
from app.utils.budget import Budget
from app.utils.exceptions import ContractViolation, FragmentError, UnsupportedConstructError
from config.settings import SolverConfig

logger = logging.getLogger(__name__)


def _split_poly(poly: Polynomial, univ: Sequence[int]) -> Tuple[Dict[int, Polynomial], Polynomial]:
    """Write ``poly`` as ``sum(a[y] * y) + c`` with a, c free of universals."""
    coeffs: Dict[int, Polynomial] = {}
    rest: Dict[Monomial, Fraction] = {}
    for mono, c in poly.terms.items():
        ys = [v for v in mono.variables if v in univ]
        if not ys:
            rest[mono] = c
            continue
        if len(ys) > 1 or mono.exponent(ys[0]) > 1:
            raise FragmentError("a monomial multiplies two universal variables")
        y = ys[0]
        coeffs[y] = coeffs.get(y, Polynomial()) + Polynomial.monomial(mono.without(y), c)
    return {y: p for y, p in coeffs.items() if not p.is_zero}, Polynomial(rest)


def _mentions(lit: Literal, univ: Sequence[int]) -> bool:
    return any(v in univ for v in lit.variables())


def to_motzkin_system(
    clause: Clause, univ_vars: Sequence[int]
) -> Union[MotzkinSystem, Passthrough]:
    """
    Negate ``clause`` into ``A(x) y <= b(x)`` and ``C(x) y < d(x)``.

    Raises:
        UnsupportedConstructError: On an equality over universal variables
        FragmentError: On a product of two universal variables
    """
    if not any(_mentions(lit, univ_vars) for lit in clause):
        return Passthrough(clause)
    system = MotzkinSystem(tuple(sorted(univ_vars)))
    outside: List[Literal] = []
    for lit in clause:
        atom = lit.atom
        if atom is None or (atom.rel == Relation.EQ and not _mentions(lit, univ_vars)):
            outside.append(lit)
            continue
        if atom.rel == Relation.EQ:
            raise UnsupportedConstructError("equality over universal variables in a quantified clause")
        # not (p <= 0) is -p < 0, not (p < 0) is -p <= 0
        coeffs, const = _split_poly(-atom.poly, univ_vars)
        row = MotzkinRow(tuple(sorted(coeffs.items())), -const)
        if atom.rel == Relation.LE:
            system.strict.append(row)
        else:
            system.nonstrict.append(row)
    system.outside = tuple(outside)
    return system


@dataclass
class Multipliers:
    lambdas: List[int] = field(default_factory=list)
    mus: List[int] = field(default_factory=list)


def motzkin_transform(
    system: MotzkinSystem, table: VarTable, tag: str = ''
) -> Tuple[List[Clause], Multipliers]:
    """
    Clauses over x and fresh multipliers stating that ``system`` is infeasible.

    Args:
        system: Rows of the negated clause
        table: Variable table receiving the Real multipliers
        tag: Suffix for multiplier names

    Returns:
        (clauses, multipliers); an empty system gives the empty clause
    """
    mult = Multipliers()
    if system.is_empty:
        return [()], mult
    for i, _ in enumerate(system.nonstrict, 1):
        mult.lambdas.append(table.add(f"lambda{tag}_{i}", VarSort.REAL, VarOrigin(OriginKind.MULTIPLIER)))
    for j, _ in enumerate(system.strict, 1):
        mult.mus.append(table.add(f"mu{tag}_{j}", VarSort.REAL, VarOrigin(OriginKind.MULTIPLIER)))

    def unit(poly: Polynomial, rel: Relation) -> Clause:
        return make_clause([Literal.of(make_atom(poly, rel, table))])

    pairs = list(zip(mult.lambdas, system.nonstrict)) + list(zip(mult.mus, system.strict))
    clauses: List[Clause] = [unit(-Polynomial.var(m), Relation.LE) for m, _ in pairs]
    for y in system.univ_vars:
        combo = Polynomial()
        for m, row in pairs:
            combo = combo + Polynomial.var(m) * row.coeff(y)
        clauses.append(unit(combo, Relation.EQ))
    lam_b = Polynomial()
    for m, row in zip(mult.lambdas, system.nonstrict):
        lam_b = lam_b + Polynomial.var(m) * row.rhs
    mu_d = Polynomial()
    mu_sum = Polynomial()
    for m, row in zip(mult.mus, system.strict):
        mu_d = mu_d + Polynomial.var(m) * row.rhs
        mu_sum = mu_sum + Polynomial.var(m)
    clauses.append(unit(lam_b + mu_d, Relation.LE))
    clauses.append(make_clause([
        Literal.of(make_atom(lam_b, Relation.LT, table)),
        Literal.of(make_atom(-mu_sum, Relation.LT, table)),
    ]))
    return clauses, mult


def _negation(lit: Literal, table: VarTable) -> List[Literal]:
    if lit.is_bool:
        return [lit.negate_bool()]
    return [Literal.of(a) for a in negate_atom(lit.atom, table)]


@dataclass
class TransformedClause:
    """Bookkeeping for one source clause."""

    source_id: int
    system: Optional[MotzkinSystem] = None
    multipliers: Multipliers = field(default_factory=Multipliers)
    indicator: Optional[int] = None
    weight: Optional[Weight] = None


@dataclass
class EaTransform:
    problem: EaProblem
    formula: WeightedFormula
    clauses: List[TransformedClause] = field(default_factory=list)

    def multiplier_vars(self) -> List[int]:
        out: List[int] = []
        for tc in self.clauses:
            out.extend(tc.multipliers.lambdas + tc.multipliers.mus)
        return out


@dataclass
class EaCertificate:
    """Multiplier values per transformed clause."""

    entries: Dict[int, Dict[str, Fraction]] = field(default_factory=dict)

    def as_model(self, table: VarTable) -> Model:
        values = {}
        for named in self.entries.values():
            for name, value in named.items():
                values[table.lookup(name)] = value
        return Model(values)


def _indicator(table: VarTable, name: str, source_id: int) -> int:
    return table.add(name, VarSort.BOOL, VarOrigin(OriginKind.SOFT_INDICATOR, clause_id=source_id))


def _guarded(guard: Literal, clauses: Sequence[Clause], outside: Clause) -> List[Clause]:
    """``guard -> (outside or all clauses)`` in clause form."""
    return [make_clause([guard] + list(outside) + list(c)) for c in clauses]


def transform_soft(
    wc: WeightedClause, univ_vars: Sequence[int], formula: WeightedFormula
) -> TransformedClause:
    """
    Replace a soft clause by an indicator ``p_S`` equivalent to its Motzkin conditions.

    The indicator becomes a unit soft clause with the original weight; the
    equivalence is added as hard clauses. Clauses free of universal
    variables stay soft as they are.
    """
    table = formula.table
    tc = TransformedClause(wc.id, weight=wc.weight)
    system = to_motzkin_system(wc.clause, univ_vars)
    if isinstance(system, Passthrough):
        formula.add_soft(system.clause, wc.weight)
        return tc
    clauses, tc.multipliers = motzkin_transform(system, table, f"_{wc.id}")
    tc.system = system
    p = _indicator(table, f"p_{wc.id}", wc.id)
    tc.indicator = p
    for c in _guarded(Literal.boolean(p, False), clauses, system.outside):
        formula.add_hard(c)
    # reverse direction: each outside literal and the full conjunction imply p
    for lit in system.outside:
        formula.add_hard(make_clause([Literal.boolean(p)] + _negation(lit, table)))
    names: List[Literal] = []
    for k, c in enumerate(clauses, 1):
        n = table.add(f"n_{wc.id}_{k}", VarSort.BOOL, VarOrigin(OriginKind.SOFT_INDICATOR, clause_id=wc.id))
        names.append(Literal.boolean(n))
        for lit in c:
            formula.add_hard(make_clause([Literal.boolean(n, False)] + _negation(lit, table)))
    formula.add_hard(make_clause([Literal.boolean(p)] + names))
    formula.add_soft((Literal.boolean(p),), wc.weight)
    return tc


def transform_hard(
    wc: WeightedClause, univ_vars: Sequence[int], formula: WeightedFormula
) -> TransformedClause:
    tc = TransformedClause(wc.id)
    system = to_motzkin_system(wc.clause, univ_vars)
    if isinstance(system, Passthrough):
        formula.add_hard(system.clause)
        return tc
    clauses, tc.multipliers = motzkin_transform(system, formula.table, f"_{wc.id}")
    tc.system = system
    if not system.outside:
        for c in clauses:
            formula.add_hard(c)
        return tc
    q = _indicator(formula.table, f"q_{wc.id}", wc.id)
    tc.indicator = q
    for c in _guarded(Literal.boolean(q, False), clauses, ()):
        formula.add_hard(c)
    formula.add_hard(make_clause(list(system.outside) + [Literal.boolean(q)]))
    return tc


def validate_problem(prob: EaProblem) -> None:
    """
    Raises:
        FragmentError: On a universal variable that is not Real or shared
            with the existential ones
    """
    table = prob.table
    for y in prob.univ_vars:
        if table.sort(y) != VarSort.REAL:
            raise FragmentError(f"universal variable {table.name(y)} must be Real")
        if y in prob.exist_vars:
            raise FragmentError(f"{table.name(y)} is quantified twice")
    for x in prob.exist_vars:
        if table.sort(x) == VarSort.REAL:
            raise FragmentError(f"existential variable {table.name(x)} must be Int")


def transform_problem(prob: EaProblem) -> EaTransform:
    """Build the Max-SMT formula over x and the multipliers."""
    validate_problem(prob)
    out = WeightedFormula(prob.table.copy())
    transform = EaTransform(prob, out)
    for wc in prob.formula.hard:
        transform.clauses.append(transform_hard(wc, prob.univ_vars, out))
    for wc in prob.formula.soft:
        transform.clauses.append(transform_soft(wc, prob.univ_vars, out))
    for poly in out.polynomials():
        for mono in poly.terms:
            if sum(1 for v in mono.variables if out.table.sort(v) == VarSort.REAL) > 1:
                raise ContractViolation("transformed monomial has two Real factors")
    logger.debug(
        f"exists-forall transform: {len(out.hard)} hard, {len(out.soft)} soft, "
        f"{len(transform.multiplier_vars())} multipliers"
    )
    return transform


def _system_infeasible_certified(
    system: MotzkinSystem, mult: Multipliers, values: Mapping[int, Fraction]
) -> bool:
    lam = [values[m] for m in mult.lambdas]
    mu = [values[m] for m in mult.mus]
    if system.is_empty:
        return False
    if any(v < 0 for v in lam + mu):
        return False
    for y in system.univ_vars:
        total = sum((l * r.coeff(y).evaluate(values) for l, r in zip(lam, system.nonstrict)), Fraction(0))
        total += sum((m * r.coeff(y).evaluate(values) for m, r in zip(mu, system.strict)), Fraction(0))
        if total != 0:
            return False
    lam_b = sum((l * r.rhs.evaluate(values) for l, r in zip(lam, system.nonstrict)), Fraction(0))
    mu_d = sum((m * r.rhs.evaluate(values) for m, r in zip(mu, system.strict)), Fraction(0))
    return lam_b + mu_d <= 0 and (lam_b < 0 or sum(mu, Fraction(0)) > 0)


def check_certificate(transform: EaTransform, model: Mapping[int, Fraction]) -> bool:
    """
    Re-evaluate the Motzkin conditions of every clause the model claims.

    Hard clauses must be certified unless one of their y-free literals
    holds; soft clauses only when their indicator is true.
    """
    for tc in transform.clauses:
        if tc.system is None:
            continue
        if tc.weight is not None and model.get(tc.indicator, Fraction(0)) == 0:
            continue
        if tc.system.outside and clause_holds(tc.system.outside, model):
            continue
        if not _system_infeasible_certified(tc.system, tc.multipliers, model):
            logger.debug(f"certificate fails for clause {tc.source_id}")
            return False
    return True


def sample_witness(
    prob: EaProblem,
    model: Mapping[int, Fraction],
    n: int = 1000,
    seed: int = 0,
    box: int = 100,
    clauses: Optional[Sequence[WeightedClause]] = None,
) -> List[Dict[int, Fraction]]:
    """
    Evaluate clauses at random rational points for the universals.

    Returns:
        The sampled y assignments that falsify some clause (empty when none do)
    """
    rng = random.Random(seed)
    targets = list(clauses) if clauses is not None else prob.formula.hard
    failures: List[Dict[int, Fraction]] = []
    for _ in range(n):
        ys = {}
        for y in prob.univ_vars:
            den = rng.choice((1, 2, 3, 7, 10))
            ys[y] = Fraction(rng.randint(-box * den, box * den), den)
        values = dict(model)
        values.update(ys)
        if not all(clause_holds(wc.clause, values) for wc in targets):
            failures.append(ys)
    return failures


def solve_ea(prob: EaProblem, cfg: SolverConfig, budget: Optional[Budget] = None) -> NiaResult:
    """
    Solve ``exists x forall y F`` through the Max-SMT engine.

    Returns:
        NiaResult whose model covers the non-universal input variables and
        whose certificate holds the multiplier values

    Raises:
        FragmentError: If the problem leaves the supported fragment
        ContractViolation: If a returned certificate does not check
    """
    transform = transform_problem(prob)
    result = solve_maxsmt(transform.formula, cfg, budget)
    if result.status != Status.SAT:
        return result
    full = result.model
    if not check_certificate(transform, full):
        logger.error("multiplier certificate does not check")
        raise ContractViolation("invalid Motzkin certificate")
    table = transform.formula.table
    certificate = EaCertificate()
    for tc in transform.clauses:
        named = {table.name(m): full[m] for m in tc.multipliers.lambdas + tc.multipliers.mus}
        if named:
            certificate.entries[tc.source_id] = named
    keep = [v for v in range(len(prob.table)) if v not in prob.univ_vars]
    result.model = full.restrict(keep)
    result.certificate = certificate.as_model(table)
    result.table = table
    return result
