from fractions import Fraction

import pytest

from app.models.base import VarSort
from app.models.ea import EaProblem, MotzkinRow, MotzkinSystem, Passthrough
from app.models.formula import Literal, Relation, Weight, WeightedFormula, clause_holds, make_atom
from app.models.polynomial import Polynomial
from app.models.results import Status
from app.services.exists_forall import (
    check_certificate,
    motzkin_transform,
    sample_witness,
    solve_ea,
    to_motzkin_system,
    transform_problem,
    validate_problem,
)
from app.services.lia_engine import LiaFormula, lia_solve
from app.services.nia_engine import solve_maxsmt
from app.utils.exceptions import FragmentError, UnsupportedConstructError
from config.settings import Mode, Strategy


def ea_table():
    formula = WeightedFormula()
    table = formula.table
    x0 = table.add('x0', VarSort.INT)
    x1 = table.add('x1', VarSort.INT)
    y1 = table.add('y1', VarSort.REAL)
    return formula, x0, x1, y1


def lit(poly, rel, table):
    return Literal.of(make_atom(poly, rel, table))


def invariant_clause():
    """x1 - x0*y1 < 0  or  2 - y1 < 0  or  x0*y1 + x0 - x1 <= 0."""
    formula, x0, x1, y1 = ea_table()
    X0, X1, Y1 = Polynomial.var(x0), Polynomial.var(x1), Polynomial.var(y1)
    table = formula.table
    clause = (
        lit(X1 - X0 * Y1, Relation.LT, table),
        lit(2 - Y1, Relation.LT, table),
        lit(X0 * Y1 + X0 - X1, Relation.LE, table),
    )
    return formula, clause, (x0, x1, y1)


class TestMotzkinSystem:

    def test_rows_of_negated_clause(self):
        _, clause, (x0, x1, y1) = invariant_clause()
        system = to_motzkin_system(clause, [y1])
        assert isinstance(system, MotzkinSystem)
        assert len(system.nonstrict) == 2 and len(system.strict) == 1
        assert system.nonstrict[0].coeff(y1) == Polynomial.var(x0)
        assert system.nonstrict[0].rhs == Polynomial.var(x1)
        assert system.nonstrict[1].coeff(y1) == Polynomial.constant(1)
        assert system.nonstrict[1].rhs == Polynomial.constant(2)
        assert system.strict[0].coeff(y1) == -Polynomial.var(x0)
        assert system.strict[0].rhs == Polynomial.var(x0) - Polynomial.var(x1)

    def test_clause_without_universals_passes_through(self):
        formula, x0, _, y1 = ea_table()
        clause = (lit(Polynomial.var(x0) - 1, Relation.LE, formula.table),)
        assert to_motzkin_system(clause, [y1]) == Passthrough(clause)

    def test_product_of_universals_rejected(self):
        formula, _, _, y1 = ea_table()
        y2 = formula.table.add('y2', VarSort.REAL)
        clause = (lit(Polynomial.var(y1) * Polynomial.var(y2), Relation.LE, formula.table),)
        with pytest.raises(FragmentError):
            to_motzkin_system(clause, [y1, y2])

    def test_equality_over_universals_rejected(self):
        formula, x0, _, y1 = ea_table()
        clause = (lit(Polynomial.var(y1) - Polynomial.var(x0), Relation.EQ, formula.table),)
        with pytest.raises(UnsupportedConstructError):
            to_motzkin_system(clause, [y1])


class TestMotzkinTransform:

    def test_certificate_satisfies_conditions(self):
        formula, clause, (x0, x1, y1) = invariant_clause()
        system = to_motzkin_system(clause, [y1])
        clauses, mult = motzkin_transform(system, formula.table)
        assert [formula.table.name(m) for m in mult.lambdas] == ['lambda_1', 'lambda_2']
        assert [formula.table.name(m) for m in mult.mus] == ['mu_1']
        lam1, lam2 = mult.lambdas
        (mu1,) = mult.mus
        values = {x0: Fraction(1), x1: Fraction(3), lam1: Fraction(0), lam2: Fraction(1), mu1: Fraction(1)}
        assert all(clause_holds(c, values) for c in clauses)
        values[lam2] = Fraction(0)
        assert not all(clause_holds(c, values) for c in clauses)

    def test_empty_system_is_the_empty_clause(self):
        formula, _, _, y1 = ea_table()
        clauses, mult = motzkin_transform(MotzkinSystem((y1,)), formula.table)
        assert clauses == [()]
        assert not mult.lambdas and not mult.mus

    def test_open_unit_interval_has_no_certificate(self):
        formula, _, _, y1 = ea_table()
        Y1 = Polynomial.var(y1)
        table = formula.table
        clause = (lit(Y1, Relation.LE, table), lit(1 - Y1, Relation.LE, table))
        system = to_motzkin_system(clause, [y1])
        assert not system.nonstrict and len(system.strict) == 2
        clauses, _ = motzkin_transform(system, table)
        assert lia_solve(LiaFormula(table, dict(enumerate(clauses)))).status == Status.UNSAT

    def test_universal_free_contradiction_is_certified(self):
        formula, _, _, y1 = ea_table()
        table = formula.table
        system = MotzkinSystem((y1,), strict=[MotzkinRow((), Polynomial.constant(-1))])
        clauses, mult = motzkin_transform(system, table)
        (mu1,) = mult.mus
        assert all(clause_holds(c, {mu1: Fraction(1)}) for c in clauses)
        assert not all(clause_holds(c, {mu1: Fraction(0)}) for c in clauses)
        assert lia_solve(LiaFormula(table, dict(enumerate(clauses)))).status == Status.SAT


class TestValidation:

    def test_integer_universal_rejected(self):
        formula, x0, x1, _ = ea_table()
        with pytest.raises(FragmentError):
            validate_problem(EaProblem(formula, [x0], [x1]))

    def test_real_existential_rejected(self):
        formula, x0, _, y1 = ea_table()
        with pytest.raises(FragmentError):
            validate_problem(EaProblem(formula, [x0, y1], []))

    def test_double_quantification_rejected(self):
        formula, _, _, y1 = ea_table()
        with pytest.raises(FragmentError):
            validate_problem(EaProblem(formula, [y1], [y1]))


class TestSolveEa:

    def test_invariant_example(self, ea_problem, make_config):
        cfg = make_config(Strategy.MAXSMT, Mode.EA)
        transform = transform_problem(ea_problem)
        assert transform.multiplier_vars()
        result = solve_ea(ea_problem, cfg)
        assert result.status == Status.SAT
        assert result.objective == 0
        assert result.certificate is not None
        clauses = ea_problem.formula.hard + ea_problem.formula.soft
        assert sample_witness(ea_problem, result.model, n=1000, clauses=clauses) == []

    def test_certificate_checked_against_transform(self, ea_problem, make_config):
        transform, model = solve_maxsmt_model(ea_problem, make_config(Strategy.MAXSMT, Mode.EA))
        assert check_certificate(transform, model)

    def test_unbounded_universal_is_unsat(self, make_config):
        formula, x0, _, y1 = ea_table()
        formula.add_hard((lit(Polynomial.var(y1) - Polynomial.var(x0), Relation.LE, formula.table),))
        result = solve_ea(EaProblem(formula, [x0], [y1]), make_config(Strategy.MAXSMT, Mode.EA))
        assert result.status == Status.UNSAT

    def test_gap_between_zero_and_one_is_unsat(self, make_config):
        formula, x0, _, y1 = ea_table()
        Y1 = Polynomial.var(y1)
        formula.add_hard((lit(Y1, Relation.LE, formula.table), lit(1 - Y1, Relation.LE, formula.table)))
        result = solve_ea(EaProblem(formula, [x0], [y1]), make_config(Strategy.MAXSMT, Mode.EA))
        assert result.status == Status.UNSAT

    def test_soft_clause_gets_indicator(self):
        formula, x0, x1, y1 = ea_table()
        body = (lit(Polynomial.var(x0) * Polynomial.var(y1) - Polynomial.var(x1), Relation.LE, formula.table),)
        formula.add_soft(body, Weight.soft(Fraction(2)))
        transform = transform_problem(EaProblem(formula, [x0, x1], [y1]))
        (tc,) = transform.clauses
        assert tc.indicator is not None
        assert transform.formula.table.name(tc.indicator).startswith('p_')
        assert [wc.clause for wc in transform.formula.soft] == [(Literal.boolean(tc.indicator),)]


def solve_maxsmt_model(prob, cfg):
    transform = transform_problem(prob)
    result = solve_maxsmt(transform.formula, cfg)
    assert result.status == Status.SAT
    return transform, result.model
