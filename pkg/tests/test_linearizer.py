from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from app.models.base import VarSort
from app.models.formula import Literal, Model, Relation, WeightedFormula, clause_holds, clause_to_str, make_atom
from app.models.polynomial import Monomial, Polynomial
from app.services.linearizer import (
    ArtificialBound,
    BoundKind,
    BoundSet,
    RelaxPolicy,
    artificial_bounds,
    choose_linearization_variables,
    linearize,
    out_of_domain_clauses,
    relax_domains_cores,
    relax_domains_min_models,
    relax_domains_non_inc,
    true_bounds,
    update,
    update_non_inc,
)
from app.services.smtlib_service import parse_script
from app.utils.exceptions import ContractViolation, LinearizationError
from tests.factories import RUNNING_EXAMPLE, int_table, le0, random_nia_formula, v

T, X, W, Y = 0, 1, 2, 3


def linearized(formula):
    chosen = choose_linearization_variables(formula)
    return linearize(formula, artificial_bounds(formula, chosen))


def upper(var, value, generation=0):
    return ArtificialBound(var, BoundKind.UPPER, value, generation=generation)


def lower(var, value, generation=0):
    return ArtificialBound(var, BoundKind.LOWER, value, generation=generation)


class TestVariableChoice:

    def test_running_example_splits_on_every_variable(self, running_formula):
        assert choose_linearization_variables(running_formula) == [T, X, W, Y]

    def test_greedy_cover_prefers_lowest_id(self):
        formula = WeightedFormula(int_table('x', 'y', 'z'))
        xyz = Polynomial.monomial(Monomial.of(0, 1, 2))
        formula.add_hard((le0(formula.table, xyz - 1),))
        assert choose_linearization_variables(formula) == [0, 1]

    def test_real_only_monomial_cannot_be_covered(self):
        formula = WeightedFormula()
        r = Polynomial.var(formula.table.add('r', VarSort.REAL))
        formula.add_hard((Literal.of(make_atom(r * r - 1, Relation.LE, formula.table)),))
        assert choose_linearization_variables(formula) == []
        with pytest.raises(LinearizationError):
            linearize(formula, BoundSet())

    def test_declared_bounds(self):
        formula = WeightedFormula(int_table('x'))
        x = v(formula.table, 'x')
        formula.add_hard((le0(formula.table, x - 5),))
        formula.add_hard((le0(formula.table, -2 - x),))
        formula.add_hard((le0(formula.table, x - 7), le0(formula.table, -x)))
        assert true_bounds(formula) == {(0, BoundKind.UPPER): 5, (0, BoundKind.LOWER): -2}


class TestLinearize:

    def test_case_clauses_for_running_example(self, running_formula):
        lin, state = linearized(running_formula)
        assert len(state.monomial_var) == 5
        assert len(state.case_clauses) == 15
        assert state.bounds.domain(T) == (-1, 1)
        lin.validate()
        names = {state.table.name(var) for var in state.monomial_var.values()}
        assert names == {'v_tx', 'v_t2', 'v_x2', 'v_w2', 'v_y2'}

    def test_product_split_on_first_chosen_variable(self, running_formula):
        _, state = linearized(running_formula)
        tx = Monomial.of(T, X)
        assert state.lin_var[tx] == T
        vq = state.monomial_var[tx]
        for k in (-1, 0, 1):
            clause = state.case_clause(tx, k)
            assert clause_holds(clause, {T: Fraction(k), X: Fraction(3), vq: Fraction(3 * k)})
            assert not clause_holds(clause, {T: Fraction(k), X: Fraction(3), vq: Fraction(3 * k + 1)})
            assert clause_holds(clause, {T: Fraction(k + 1), X: Fraction(3), vq: Fraction(100)})

    def test_models_inside_domains_are_exact(self, running_formula):
        lin, state = linearized(running_formula)
        values = state.extend_model({T: Fraction(1), X: Fraction(1), W: Fraction(0), Y: Fraction(-1)})
        assert all(clause_holds(c, values) for cid, c in lin.clauses.items() if cid in state.case_clauses.values())

    def test_update_adds_cases_for_new_values(self, running_formula):
        _, state = linearized(running_formula)
        old = state.bounds
        added = update(state, old, old.replace([upper(X, 4, 1)]))
        assert len(added) == 3
        assert (Monomial.of(X, X), 4) in state.case_clauses

    def test_update_refuses_to_tighten(self, running_formula):
        _, state = linearized(running_formula)
        old = state.bounds
        with pytest.raises(ContractViolation):
            update(state, old, old.replace([upper(X, 0, 1)]))


class TestRelaxation:

    def test_cores_first_step_is_one(self):
        bounds = BoundSet([lower(X, -1), upper(X, 1)])
        relaxed = relax_domains_cores(bounds, [upper(X, 1)], RelaxPolicy())
        assert relaxed.domain(X) == (-1, 2)
        assert relaxed.get(X, BoundKind.UPPER).generation == 1

    def test_cores_jump_to_weaker_declared_bound(self):
        bounds = BoundSet([lower(X, -1), upper(X, 1)])
        policy = RelaxPolicy(true_bounds={(X, BoundKind.UPPER): 5, (X, BoundKind.LOWER): -1})
        relaxed = relax_domains_cores(bounds, [upper(X, 1), lower(X, -1)], policy)
        assert relaxed.domain(X) == (-2, 5)

    @pytest.mark.parametrize('correction, occurrences, expected', [
        (True, {X: 2}, 3),
        (True, {X: 1}, 4),
        (False, {X: 1}, 3),
    ])
    def test_cores_later_steps(self, correction, occurrences, expected):
        bounds = BoundSet([lower(X, -1), upper(X, 2, 1)])
        policy = RelaxPolicy(correction=correction, occurrences=occurrences)
        relaxed = relax_domains_cores(bounds, [upper(X, 2, 1)], policy)
        assert relaxed.domain(X) == (-1, expected)

    def test_step_is_capped_by_beta(self):
        policy = RelaxPolicy(alpha=Fraction(2), beta=Fraction(3))
        assert policy.step(upper(X, 1, 50)) == 6

    def test_core_without_bounds_rejected(self):
        bounds = BoundSet([lower(X, -1), upper(X, 1)])
        with pytest.raises(ContractViolation):
            relax_domains_cores(bounds, [upper(Y, 1)], RelaxPolicy())

    def test_min_models_moves_to_model_value(self):
        bounds = BoundSet([lower(T, -1), upper(T, 1), lower(X, -1), upper(X, 1)])
        model = Model({T: 1, X: 4})
        relaxed = relax_domains_min_models(bounds, model, RelaxPolicy())
        assert relaxed.domain(X) == (-1, 4)
        assert relaxed.domain(T) == (-1, 1)

    def test_min_models_later_generation_overshoots(self):
        bounds = BoundSet([lower(X, -1), upper(X, 4, 1)])
        relaxed = relax_domains_min_models(bounds, Model({X: 7}), RelaxPolicy())
        assert relaxed.domain(X) == (-1, 9)

    def test_min_models_needs_a_violation(self):
        bounds = BoundSet([lower(X, -1), upper(X, 1)])
        with pytest.raises(ContractViolation):
            relax_domains_min_models(bounds, Model({X: 0}), RelaxPolicy())


class TestNonIncremental:

    def test_jump_recentres_and_blocks(self, running_formula):
        _, state = linearized(running_formula)
        old = state.bounds
        model = Model({T: 1, X: 4, W: 0, Y: 0})
        new = relax_domains_non_inc(old, model, radius=2)
        assert new.domain(X) == (2, 6)
        assert all(new.domain(var) == (-1, 1) for var in (T, W, Y))

        change = update_non_inc(state, old, new)
        assert len(change.removed) == 3
        assert len(change.added) == 5
        x2 = Monomial.of(X, X)
        assert sorted(k for (m, k) in state.case_clauses if m == x2) == [2, 3, 4, 5, 6]
        blocking = state.clauses[change.blocking_id]
        assert len(blocking) == 8
        assert not clause_holds(blocking, {T: Fraction(0), X: Fraction(0), W: Fraction(0), Y: Fraction(0)})
        assert clause_holds(blocking, model)

    def test_blocking_clause_from_optimality_core(self, running_formula):
        _, state = linearized(running_formula)
        old = state.bounds
        new = relax_domains_non_inc(old, Model({T: 1, X: 4, W: 0, Y: 0}), radius=2)
        core = [old.get(T, BoundKind.LOWER), old.get(T, BoundKind.UPPER),
                old.get(X, BoundKind.LOWER), old.get(X, BoundKind.UPPER), old.get(Y, BoundKind.UPPER)]
        change = update_non_inc(state, old, new, core)
        assert len(state.clauses[change.blocking_id]) == 5
        assert state.blocking_clauses == [change.blocking_id]


class TestOutOfDomain:

    def test_squares_bounded_outside_the_domain(self, running_formula):
        _, state = linearized(running_formula)
        added = out_of_domain_clauses(state)
        assert len(added) == 8
        assert out_of_domain_clauses(state) == []
        vx2 = state.monomial_var[Monomial.of(X, X)]
        clauses = [state.clauses[cid] for key, cid in state.ood_clauses.items() if key[0] == Monomial.of(X, X)]
        assert all(clause_holds(c, {X: Fraction(3), vx2: Fraction(9)}) for c in clauses)
        assert not all(clause_holds(c, {X: Fraction(3), vx2: Fraction(0)}) for c in clauses)
        assert not all(clause_holds(c, {X: Fraction(-2), vx2: Fraction(3)}) for c in clauses)


def rendered(state):
    return sorted(clause_to_str(c, state.table) for c in state.formula().clauses.values())


class TestInvariants:

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=8, max_size=8))
    def test_update_matches_fresh_linearization(self, widen):
        formula = parse_script(RUNNING_EXAMPLE).formula
        _, state = linearized(formula)
        old = state.bounds
        new = old.replace(
            ArtificialBound(b.var, b.kind, b.value + d if b.kind == BoundKind.UPPER else b.value - d, generation=1)
            for b, d in zip(list(old), widen)
        )
        update(state, old, new)
        _, fresh = linearize(formula, new)
        assert rendered(state) == rendered(fresh)
        for mono, split in state.lin_var.items():
            low, up = new.domain(split)
            assert sorted(k for (m, k) in state.case_clauses if m == mono) == list(range(low, up + 1))

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_models_within_domains_satisfy_case_clauses(self, data):
        formula = random_nia_formula(data.draw(st.integers(0, 10 ** 6)), n_vars=3, box=None, max_degree=3, n_clauses=3)
        chosen = choose_linearization_variables(formula)
        bounds = []
        for var in chosen:
            bounds += [lower(var, data.draw(st.integers(-4, 0))), upper(var, data.draw(st.integers(0, 4)))]
        _, state = linearize(formula, BoundSet(bounds))
        point = {}
        for var in range(len(formula.table)):
            low, up = state.bounds.domain(var) if var in chosen else (-6, 6)
            point[var] = Fraction(data.draw(st.integers(low, up)))
        values = state.extend_model(point)
        for cid in state.case_clauses.values():
            assert clause_holds(state.clauses[cid], values)
        original = all(clause_holds(wc.clause, point) for wc in formula.hard)
        assert all(clause_holds(c, values) for c in state.base.values()) == original

    @settings(max_examples=50, deadline=None)
    @given(st.integers(-6, 0), st.integers(0, 6))
    def test_out_of_domain_clauses_hold_for_every_integer(self, low, up):
        formula = parse_script(RUNNING_EXAMPLE).formula
        _, state = linearized(formula)
        state.bounds = state.bounds.replace([lower(T, low), upper(T, up), lower(X, low), upper(X, up)])
        added = out_of_domain_clauses(state)
        assert added
        for value in range(-20, 21):
            values = state.extend_model({var: Fraction(value) for var in (T, X, W, Y)})
            assert all(clause_holds(state.clauses[cid], values) for cid in added)
