"""Formula and result models."""
from app.models.base import OriginKind, VarInfo, VarOrigin, VarSort, VarTable
from app.models.ea import EaProblem, MotzkinRow, MotzkinSystem, Passthrough
from app.models.formula import (
    ZERO_COST,
    Atom,
    Clause,
    Cost,
    Literal,
    Model,
    Relation,
    Weight,
    WeightedClause,
    WeightedFormula,
    check_model,
    make_atom,
    make_clause,
    negate_atom,
)
from app.models.polynomial import Monomial, Polynomial, eval_monomial_at, eval_poly, poly_arith
from app.models.results import (
    IterationRecord,
    LiaResult,
    NiaResult,
    OptimalityCore,
    OptResult,
    SolverStats,
    Status,
)

__all__ = [
    'OriginKind', 'VarInfo', 'VarOrigin', 'VarSort', 'VarTable',
    'EaProblem', 'MotzkinRow', 'MotzkinSystem', 'Passthrough',
    'ZERO_COST', 'Atom', 'Clause', 'Cost', 'Literal', 'Model', 'Relation', 'Weight',
    'WeightedClause', 'WeightedFormula', 'check_model', 'make_atom', 'make_clause', 'negate_atom',
    'Monomial', 'Polynomial', 'eval_monomial_at', 'eval_poly', 'poly_arith',
    'IterationRecord', 'LiaResult', 'NiaResult', 'OptimalityCore', 'OptResult', 'SolverStats',
    'Status',
]
