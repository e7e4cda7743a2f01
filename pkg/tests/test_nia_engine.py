import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from app.models.formula import Literal, Relation, WeightedFormula, make_atom
from app.models.results import Status
from app.services import nia_engine
from app.services.nia_engine import solve_maxsmt, solve_smt_cores, solve_smt_min_models
from app.services.oracle_service import brute_force_nia
from app.utils.budget import Budget
from app.utils.exceptions import ConfigurationError
from config.settings import Mode, SolverConfig, Strategy
from tests.factories import int_table, random_nia_formula, v


def no_real_root():
    formula = WeightedFormula(int_table('x'))
    x = v(formula.table, 'x')
    formula.add_hard((Literal.of(make_atom(x * x + 1, Relation.LE, formula.table)),))
    return formula


class TestSmtCores:

    def test_running_example_is_sat(self, running_formula, make_config):
        result = solve_smt_cores(running_formula, make_config(Strategy.CORES, ood_clauses=False))
        assert result.status == Status.SAT
        holds, _ = running_formula.check(result.model)
        assert holds
        assert result.stats.lia_calls == result.stats.iterations

    def test_out_of_domain_clauses_refute_negative_square(self, make_config):
        result = solve_smt_cores(no_real_root(), make_config(Strategy.CORES, ood_clauses=True))
        assert result.status == Status.UNSAT

    def test_wrong_strategy_rejected(self, running_formula, make_config):
        with pytest.raises(ConfigurationError):
            solve_smt_cores(running_formula, make_config(Strategy.MAXSMT))

    def test_expired_deadline_is_unknown(self, running_formula, make_config, mocker):
        mocker.patch.object(Budget, 'expired', return_value=True)
        result = solve_smt_cores(running_formula, make_config(Strategy.CORES), Budget(timeout=1.0))
        assert result.status == Status.UNKNOWN
        assert result.stats.iterations == 0


class TestSmtMinModels:

    def test_maxsmt_strategy_first_iteration_violates_one_bound(self, running_formula, make_config):
        result = solve_smt_min_models(running_formula, make_config(Strategy.MAXSMT))
        assert result.status == Status.SAT
        assert result.stats.history[0].bound_cost == 1
        assert result.stats.history[-1].outcome == 'sat'
        assert running_formula.check(result.model)[0]

    def test_omt_strategy(self, running_formula, make_config):
        result = solve_smt_min_models(running_formula, make_config(Strategy.OMT))
        assert result.status == Status.SAT
        assert result.stats.iterations >= 3
        assert result.stats.history[0].bound_cost == 1
        assert running_formula.check(result.model)[0]

    @pytest.mark.parametrize('strategy', [Strategy.JUMP, Strategy.JUMP_CORES])
    def test_jump_strategies(self, running_formula, make_config, strategy):
        result = solve_smt_min_models(running_formula, make_config(strategy))
        assert result.status == Status.SAT
        assert running_formula.check(result.model)[0]
        jumped = [rec for rec in result.stats.history if rec.outcome == 'jumped']
        assert all(rec.blocking_size for rec in jumped)

    def test_first_jump_recentres_on_the_minimal_model(self, running_formula, make_config, mocker):
        spy = mocker.spy(nia_engine, 'update_non_inc')
        result = solve_smt_min_models(running_formula, make_config(Strategy.JUMP))
        first = result.stats.history[0]
        assert first.outcome == 'jumped'
        assert first.bound_cost == 1
        assert first.domains == {'t': (-1, 1), 'x': (-1, 1), 'w': (-1, 1), 'y': (1, 5)}
        assert first.blocking_size == 8
        state = spy.call_args_list[0].args[0]
        blocking = state.clauses[state.blocking_clauses[0]]
        assert {lit.to_str(state.table) for lit in blocking} == {
            't + 2 <= 0', '-t + 2 <= 0', 'x + 2 <= 0', '-x + 2 <= 0',
            'w + 2 <= 0', '-w + 2 <= 0', 'y + 2 <= 0', '-y + 2 <= 0',
        }

    def test_first_jump_blocks_the_optimality_core(self, running_formula, make_config, mocker):
        spy = mocker.spy(nia_engine, 'update_non_inc')
        result = solve_smt_min_models(running_formula, make_config(Strategy.JUMP_CORES))
        assert result.stats.history[0].blocking_size == 5
        state = spy.call_args_list[0].args[0]
        blocking = state.clauses[state.blocking_clauses[0]]
        assert {lit.to_str(state.table) for lit in blocking} == {
            't + 2 <= 0', '-t + 2 <= 0', 'x + 2 <= 0', '-x + 2 <= 0', '-y + 2 <= 0',
        }

    def test_cores_strategy_rejected(self, running_formula, make_config):
        with pytest.raises(ConfigurationError):
            solve_smt_min_models(running_formula, make_config(Strategy.CORES))

    def test_domains_only_grow(self, running_formula, make_config):
        result = solve_smt_min_models(running_formula, make_config(Strategy.MAXSMT))
        previous = None
        for snapshot in result.stats.bound_sets:
            bounds = {(var, kind): value for var, kind, value in snapshot}
            if previous is not None:
                for (var, kind), value in previous.items():
                    if kind == 'upper':
                        assert bounds[(var, kind)] >= value
                    else:
                        assert bounds[(var, kind)] <= value
            previous = bounds


class TestMaxSmt:

    def test_soft_example_optimum(self, soft_formula, make_config):
        result = solve_maxsmt(soft_formula, make_config(Strategy.MAXSMT, Mode.MAXSMT))
        assert result.status == Status.SAT
        assert result.objective == 1
        holds, cost = soft_formula.check(result.model)
        assert holds
        assert cost[1] == 1

    def test_hard_unsat(self, make_config):
        result = solve_maxsmt(no_real_root(), make_config(Strategy.MAXSMT, Mode.MAXSMT))
        assert result.status == Status.UNSAT

    def test_omt_not_available(self, soft_formula, make_config):
        with pytest.raises(ConfigurationError):
            solve_maxsmt(soft_formula, make_config(Strategy.OMT, Mode.MAXSMT))

    def test_expired_deadline_is_unknown(self, soft_formula, make_config, mocker):
        mocker.patch.object(Budget, 'expired', return_value=True)
        result = solve_maxsmt(soft_formula, make_config(Strategy.MAXSMT, Mode.MAXSMT), Budget(timeout=1.0))
        assert result.status == Status.UNKNOWN
        assert result.best_so_far is None
        assert result.stats.iterations == 0

    def test_unknown_keeps_best_model(self, soft_formula, make_config, mocker):
        mocker.patch.object(Budget, 'expired', side_effect=[False, False, True, True])
        result = solve_maxsmt(soft_formula, make_config(Strategy.MAXSMT, Mode.MAXSMT), Budget(timeout=1.0))
        assert result.status in (Status.SAT, Status.UNKNOWN)
        if result.best_so_far is not None:
            assert soft_formula.check(result.best_so_far)[0]


STRATEGIES = [Strategy.CORES, Strategy.MAXSMT, Strategy.OMT, Strategy.JUMP, Strategy.JUMP_CORES]


def desk_formula(seed, box=None, n_soft=0):
    """Up to four variables, degree three, coefficients within 5 and up to six clauses."""
    return random_nia_formula(
        seed, n_vars=1 + seed % 4, box=box, n_soft=n_soft, max_degree=3,
        n_clauses=1 + seed // 4 % 6, coeff=5, const_range=5,
    )


def solve_with(formula, strategy, timeout=10.0):
    cfg = SolverConfig(strategy=strategy, timeout=timeout)
    if strategy == Strategy.CORES:
        return solve_smt_cores(formula, cfg)
    return solve_smt_min_models(formula, cfg)


@pytest.mark.parametrize('strategy', [Strategy.JUMP, Strategy.JUMP_CORES])
def test_jump_bound_sets_never_repeat(running_formula, make_config, strategy):
    result = solve_smt_min_models(running_formula, make_config(strategy))
    assert result.stats.iterations > 1
    assert len(set(result.stats.bound_sets)) == len(result.stats.bound_sets)


@pytest.mark.slow
class TestAgainstOracle:

    @pytest.mark.parametrize('strategy', STRATEGIES)
    @settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(seed=st.integers(0, 10 ** 6))
    def test_answers_are_sound(self, strategy, seed):
        formula = desk_formula(seed)
        result = solve_with(formula, strategy)
        if result.status == Status.SAT:
            assert formula.check(result.model)[0]
        elif result.status == Status.UNSAT:
            assert not brute_force_nia(formula, box=(-6, 6)).found

    @pytest.mark.parametrize('strategy', [Strategy.JUMP, Strategy.JUMP_CORES])
    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(seed=st.integers(0, 10 ** 6))
    def test_jump_bound_sets_never_repeat(self, strategy, seed):
        result = solve_with(desk_formula(seed), strategy)
        assert len(set(result.stats.bound_sets)) == len(result.stats.bound_sets)

    @settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(st.integers(0, 10 ** 6))
    def test_maxsmt_objective_matches_enumeration(self, seed):
        formula = desk_formula(seed, box=6, n_soft=1 + seed % 3)
        expected = brute_force_nia(formula, box=(-6, 6))
        cfg = SolverConfig(mode=Mode.MAXSMT, strategy=Strategy.MAXSMT, timeout=20.0)
        result = solve_maxsmt(formula, cfg)
        if result.status == Status.UNKNOWN:
            return
        assert (result.status == Status.SAT) == expected.found
        if expected.found:
            assert result.objective == expected.cost[1]
            assert formula.check(result.model)[1][1] == expected.cost[1]
