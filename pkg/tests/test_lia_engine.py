import itertools
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from app.models.base import VarSort, VarTable
from app.models.formula import Literal, Relation, clause_holds, make_atom
from app.models.polynomial import Polynomial
from app.models.results import Status
from app.services.lia_engine import LiaFormula, lia_solve, lia_solve_assuming
from app.utils.budget import Budget, raise_recursion_limit
from app.utils.exceptions import ContractViolation
from tests.factories import box_clauses, int_table, le0, lia, random_lia_clauses, unit, v


def brute_force(table, clauses, lo=-3, hi=3):
    n = len(table)
    for point in itertools.product(range(lo, hi + 1), repeat=n):
        values = {i: Fraction(p) for i, p in enumerate(point)}
        if all(clause_holds(c, values) for c in clauses):
            return values
    return None


class TestLiaSolve:

    def test_sat_model_is_integral_and_satisfies(self):
        table = int_table('x', 'y')
        x, y = v(table, 'x'), v(table, 'y')
        formula = lia(
            table,
            (le0(table, 3 - x - y),),
            (le0(table, x - 1),),
            (le0(table, y - 2),),
        )
        result = lia_solve(formula)
        assert result.status == Status.SAT
        assert result.model[0] == 1 and result.model[1] == 2

    def test_core_names_only_conflicting_clauses(self):
        table = int_table('x', 'y')
        x, y = v(table, 'x'), v(table, 'y')
        formula = lia(table, (le0(table, 2 - x),), (le0(table, x - 1),), (le0(table, y - 5),))
        result = lia_solve(formula)
        assert result.status == Status.UNSAT
        assert result.core == frozenset({0, 1})

    def test_empty_clause_is_unsat(self):
        table = int_table('x')
        result = lia_solve(lia(table, (le0(table, v(table, 'x')),), ()))
        assert result.status == Status.UNSAT
        assert result.core == frozenset({1})

    def test_constant_atoms(self):
        table = int_table('x')
        true = le0(table, Polynomial.constant(-1))
        result = lia_solve(lia(table, (true,)))
        assert result.status == Status.SAT

    def test_integer_gap_refuted(self):
        table = int_table('x')
        formula = lia(table, unit(make_atom(v(table, 'x').scale(2) - 1, Relation.EQ, table)))
        assert lia_solve(formula).status == Status.UNSAT

    def test_real_variables_take_fractions(self):
        table = VarTable()
        r = Polynomial.var(table.add('r', VarSort.REAL))
        formula = lia(table, unit(make_atom(r.scale(2) - 1, Relation.EQ, table)))
        result = lia_solve(formula)
        assert result.status == Status.SAT
        assert result.model[0] == Fraction(1, 2)

    def test_strict_real_bounds(self):
        table = VarTable()
        r = Polynomial.var(table.add('r', VarSort.REAL))
        formula = lia(
            table,
            unit(make_atom(-r, Relation.LT, table)),
            unit(make_atom(r - 1, Relation.LT, table)),
        )
        result = lia_solve(formula)
        assert result.status == Status.SAT
        assert 0 < result.model[0] < 1

    def test_bounded_branching_proves_unsat(self):
        table = int_table('x', 'y')
        x, y = v(table, 'x'), v(table, 'y')
        clauses = [unit(make_atom((x + y).scale(2) - 1, Relation.EQ, table))] + box_clauses(table, -5, 5)
        assert lia_solve(lia(table, *clauses)).status == Status.UNSAT

    def test_branch_depth_budget_gives_unknown(self):
        table = int_table('x', 'y')
        x, y = v(table, 'x'), v(table, 'y')
        formula = lia(table, unit(make_atom((x + y).scale(2) - 1, Relation.EQ, table)))
        result = lia_solve(formula, Budget(max_branch_depth=8))
        assert result.status == Status.UNKNOWN

    def test_node_budget_gives_unknown(self):
        table = int_table('x', 'y')
        x, y = v(table, 'x'), v(table, 'y')
        formula = lia(table, (le0(table, 3 - x - y),))
        assert lia_solve(formula, Budget(max_nodes=0)).status == Status.UNKNOWN

    def test_boolean_literals(self):
        table = int_table('x')
        b = table.add('b', VarSort.BOOL)
        formula = lia(
            table,
            (Literal.boolean(b, False), le0(table, 5 - v(table, 'x'))),
            (Literal.boolean(b),),
        )
        result = lia_solve(formula)
        assert result.status == Status.SAT
        assert result.model[b] == 1
        assert result.model[0] >= 5

    def test_non_linear_atom_rejected(self):
        table = int_table('x')
        x = v(table, 'x')
        with pytest.raises(ContractViolation):
            lia_solve(lia(table, (le0(table, x * x - 1),)))


class TestAssumptions:

    def test_assumption_core(self):
        table = int_table('x', 'y', 'z')
        x, y, z = v(table, 'x'), v(table, 'y'), v(table, 'z')
        formula = lia(table, (le0(table, 4 - x - y),))
        assumptions = [le0(table, x - 1), le0(table, y - 1), le0(table, z)]
        result = lia_solve_assuming(formula, assumptions)
        assert result.status == Status.UNSAT
        assert result.assumption_core == frozenset({0, 1})
        assert result.core == frozenset({0})

    def test_implied_assumptions_are_not_cited(self):
        table = int_table('x')
        x = v(table, 'x')
        formula = lia(table, (le0(table, x - 1),), (le0(table, 3 - x),))
        result = lia_solve_assuming(formula, [le0(table, x - 2)])
        assert result.status == Status.UNSAT
        assert result.assumption_core == frozenset()

    def test_sat_model_respects_assumptions(self):
        table = int_table('x')
        x = v(table, 'x')
        result = lia_solve_assuming(lia(table, (le0(table, x - 10),)), [le0(table, 7 - x)])
        assert result.status == Status.SAT
        assert 7 <= result.model[0] <= 10


class TestAgainstEnumeration:

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6))
    def test_agrees_with_enumeration_and_cores_are_unsat(self, seed):
        table, clauses = random_lia_clauses(seed)
        clauses = clauses + box_clauses(table, -3, 3)
        formula = LiaFormula(table, dict(enumerate(clauses)))
        result = lia_solve(formula)
        witness = brute_force(table, clauses)
        if witness is None:
            assert result.status == Status.UNSAT
            core = [clauses[i] for i in sorted(result.core)]
            assert brute_force(table, core) is None
        else:
            assert result.status == Status.SAT
            assert all(clause_holds(c, result.model) for c in clauses)

    @settings(max_examples=20)
    @given(st.integers(0, 10 ** 6), st.integers(1, 1000))
    def test_branching_seed_changes_order_not_answer(self, seed, branching_seed):
        table, clauses = random_lia_clauses(seed)
        clauses = clauses + box_clauses(table, -3, 3)
        formula = LiaFormula(table, dict(enumerate(clauses)))
        plain = lia_solve(formula)
        shuffled = lia_solve(formula, seed=branching_seed)
        assert shuffled.status == plain.status
        if shuffled.status == Status.SAT:
            assert all(clause_holds(c, shuffled.model) for c in clauses)
            assert lia_solve(formula, seed=branching_seed).model == shuffled.model


def test_recursion_limit_only_grows():
    before = sys.getrecursionlimit()
    try:
        assert raise_recursion_limit(before + 100) == before + 100
        assert raise_recursion_limit(before) == before + 100
    finally:
        sys.setrecursionlimit(before)
