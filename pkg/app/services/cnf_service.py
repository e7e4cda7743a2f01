"""
Boolean structure over arithmetic atoms and its clause form.

Terms are normalized to negation normal form first. Quantifier-free input
is then clausified with fresh names for nested conjunctions; bodies under a
universal quantifier are distributed instead, since naming there would
change their meaning.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

from app.models.base import OriginKind, VarOrigin, VarSort, VarTable
from app.models.formula import Atom, Clause, Literal, WeightedFormula, Weight, make_clause, negate_atom
from app.utils.exceptions import UnsupportedConstructError

logger = logging.getLogger(__name__)

MAX_DISTRIBUTED_CLAUSES = 10000


@dataclass(frozen=True)
class BConst:
    value: bool


@dataclass(frozen=True)
class BLit:
    literal: Literal


@dataclass(frozen=True)
class BNot:
    arg: "BTerm"


@dataclass(frozen=True)
class BAnd:
    args: Tuple["BTerm", ...]


@dataclass(frozen=True)
class BOr:
    args: Tuple["BTerm", ...]


BTerm = Union[BConst, BLit, BNot, BAnd, BOr]

TRUE = BConst(True)
FALSE = BConst(False)


def b_and(*args: BTerm) -> BTerm:
    return BAnd(tuple(args))


def b_or(*args: BTerm) -> BTerm:
    return BOr(tuple(args))


def b_implies(a: BTerm, b: BTerm) -> BTerm:
    return BOr((BNot(a), b))


def b_iff(a: BTerm, b: BTerm) -> BTerm:
    return BAnd((b_implies(a, b), b_implies(b, a)))


def b_ite(c: BTerm, a: BTerm, b: BTerm) -> BTerm:
    return BAnd((b_implies(c, a), BOr((c, b))))


def b_atom(atom: Atom) -> BTerm:
    if atom.is_constant:
        return BConst(atom.constant_truth())
    return BLit(Literal.of(atom))


def to_nnf(term: BTerm, table: VarTable, positive: bool = True) -> BTerm:
    """Push negations to the leaves and fold constants."""
    if isinstance(term, BConst):
        return BConst(term.value == positive)
    if isinstance(term, BNot):
        return to_nnf(term.arg, table, not positive)
    if isinstance(term, BLit):
        if positive:
            return term
        lit = term.literal
        if lit.is_bool:
            return BLit(lit.negate_bool())
        return _flatten(BOr(tuple(b_atom(a) for a in negate_atom(lit.atom, table))))
    args = tuple(to_nnf(a, table, positive) for a in term.args)
    conj = isinstance(term, BAnd) == positive
    return _flatten(BAnd(args) if conj else BOr(args))


def _flatten(term: BTerm) -> BTerm:
    if not isinstance(term, (BAnd, BOr)):
        return term
    kind = type(term)
    absorbing = isinstance(term, BOr)
    out: List[BTerm] = []
    for a in term.args:
        if isinstance(a, BConst):
            if a.value == absorbing:
                return a
            continue
        if isinstance(a, kind):
            out.extend(a.args)
        else:
            out.append(a)
    if not out:
        return BConst(not absorbing)
    if len(out) == 1:
        return out[0]
    return kind(tuple(out))


def _as_clause(term: BTerm) -> Union[Clause, None]:
    """The clause a literal or a disjunction of literals denotes, else None."""
    if isinstance(term, BLit):
        return (term.literal,)
    if isinstance(term, BOr) and all(isinstance(a, BLit) for a in term.args):
        return make_clause(a.literal for a in term.args)
    return None


class Clausifier:
    """Polarity-aware naming of nested subterms into a weighted formula."""

    def __init__(self, formula: WeightedFormula):
        self.formula = formula
        self.names = 0

    def _fresh(self) -> int:
        self.names += 1
        return self.formula.table.add(f"tseitin!{self.names}", VarSort.BOOL, VarOrigin(OriginKind.TSEITIN))

    def _literal_for(self, term: BTerm) -> Literal:
        """A literal implying ``term``, naming it when needed."""
        if isinstance(term, BLit):
            return term.literal
        name = self._fresh()
        guard = Literal.boolean(name, False)
        for clause in self._clauses(term):
            self.formula.add_hard(make_clause((guard,) + clause))
        return Literal.boolean(name)

    def _clauses(self, term: BTerm) -> List[Clause]:
        if isinstance(term, BConst):
            return [] if term.value else [()]
        if isinstance(term, BAnd):
            out: List[Clause] = []
            for a in term.args:
                out.extend(self._clauses(a))
            return out
        clause = _as_clause(term)
        if clause is not None:
            return [clause]
        return [make_clause(self._literal_for(a) for a in term.args)]

    def add_hard(self, term: BTerm) -> List[int]:
        term = to_nnf(term, self.formula.table)
        return [self.formula.add_hard(c) for c in self._clauses(term)]

    def add_soft(self, term: BTerm, weight: Weight) -> List[int]:
        """One soft clause; a term that is not a clause gets a name first."""
        term = to_nnf(term, self.formula.table)
        if isinstance(term, BConst):
            return [] if term.value else [self.formula.add_soft((), weight)]
        clause = _as_clause(term)
        if clause is None:
            clause = (self._literal_for(term),)
        return [self.formula.add_soft(clause, weight)]


def distribute(term: BTerm, table: VarTable) -> List[Clause]:
    """
    Equivalent clause set by distributing disjunctions over conjunctions.

    Raises:
        UnsupportedConstructError: If the clause set grows too large
    """
    term = to_nnf(term, table)
    return _distribute(term)


def _distribute(term: BTerm) -> List[Clause]:
    if isinstance(term, BConst):
        return [] if term.value else [()]
    if isinstance(term, BLit):
        return [(term.literal,)]
    if isinstance(term, BAnd):
        out: List[Clause] = []
        for a in term.args:
            out.extend(_distribute(a))
        return out
    parts = [_distribute(a) for a in term.args]
    size = 1
    for p in parts:
        size *= max(1, len(p))
    if size > MAX_DISTRIBUTED_CLAUSES:
        raise UnsupportedConstructError("quantified body too large to convert to clauses")
    return [make_clause(itertools.chain.from_iterable(combo)) for combo in itertools.product(*parts)]
