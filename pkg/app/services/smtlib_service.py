"""
SMT-LIB 2 front end for QF_NIA, weighted soft assertions and
exists-forall scripts.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from app.models.base import VarSort, VarTable
from app.models.ea import EaProblem
from app.models.formula import Literal, Relation, Weight, WeightedFormula, make_atom
from app.models.polynomial import Polynomial
from app.services.cnf_service import (
    FALSE,
    TRUE,
    BLit,
    BNot,
    BTerm,
    Clausifier,
    b_and,
    b_atom,
    b_iff,
    b_implies,
    b_ite,
    b_or,
    distribute,
)
from app.utils.exceptions import ContractViolation, ParseError, UnsupportedConstructError

logger = logging.getLogger(__name__)

LOGICS = ('QF_NIA', 'QF_LIA', 'QF_NRA', 'QF_NIRA', 'NIA_EA')
SORTS = {'Int': VarSort.INT, 'Real': VarSort.REAL, 'Bool': VarSort.BOOL}
UNSUPPORTED_OPS = ('div', 'mod', 'abs', 'select', 'store', 'to_int', 'is_int', 'push', 'pop')

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)|(?P<comment>;[^\n]*)|(?P<lpar>\()|(?P<rpar>\))
      |(?P<quoted>\|[^|]*\|)|(?P<string>"(?:[^"]|"")*")
      |(?P<decimal>\d+\.\d+)|(?P<numeral>\d+)
      |(?P<keyword>:[^\s()|;"]+)|(?P<symbol>[^\s()|;"]+)""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass
class Node:
    """Parenthesized list with the position of its opening parenthesis."""

    items: List["SExpr"]
    line: int
    column: int


SExpr = Union[Token, Node]


def _where(expr: SExpr) -> Tuple[int, int]:
    return expr.line, expr.column


def _error(msg: str, expr: SExpr, cls=ParseError) -> ParseError:
    return cls(msg, *_where(expr))


def tokenize(text: str) -> List[Token]:
    """
    Raises:
        ParseError: On characters no token can start with
    """
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ('ws', 'comment'):
            value = chunk[1:-1] if kind == 'quoted' else chunk
            tokens.append(Token('symbol' if kind == 'quoted' else kind, value, line, pos - line_start + 1))
        newlines = chunk.count('\n')
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind('\n') + 1
        pos = m.end()
    return tokens


def read_sexprs(text: str) -> List[SExpr]:
    tokens = tokenize(text)
    stack: List[Node] = []
    top: List[SExpr] = []
    for tok in tokens:
        if tok.kind == 'lpar':
            stack.append(Node([], tok.line, tok.column))
        elif tok.kind == 'rpar':
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.column)
            node = stack.pop()
            (stack[-1].items if stack else top).append(node)
        else:
            (stack[-1].items if stack else top).append(tok)
    if stack:
        raise ParseError("missing ')'", stack[-1].line, stack[-1].column)
    return top


def _head(expr: SExpr) -> Optional[str]:
    if isinstance(expr, Node) and expr.items and isinstance(expr.items[0], Token):
        return expr.items[0].text
    return None


def _numeral(tok: Token) -> Fraction:
    if tok.kind == 'numeral':
        return Fraction(int(tok.text))
    return Fraction(tok.text)


@dataclass
class Script:
    """A parsed script: declarations, assertions and their clause form."""

    logic: Optional[str] = None
    declarations: List[Tuple[str, str]] = field(default_factory=list)
    hard_asserts: List[SExpr] = field(default_factory=list)
    soft_asserts: List[Tuple[SExpr, Fraction]] = field(default_factory=list)
    commands: List[str] = field(default_factory=list)
    expected_status: Optional[str] = None
    formula: WeightedFormula = field(default_factory=WeightedFormula)

    @property
    def table(self) -> VarTable:
        return self.formula.table

    @property
    def has_soft(self) -> bool:
        return bool(self.soft_asserts)


class TermTranslator:
    """Sort-checked translation of terms into polynomials and Boolean terms."""

    def __init__(self, table: VarTable, bound: Optional[Dict[str, int]] = None):
        self.table = table
        self.bound: Dict[str, int] = dict(bound or {})
        self.lets: Dict[str, SExpr] = {}
        self.in_let = False

    def _var(self, tok: Token) -> int:
        if tok.text in self.bound:
            return self.bound[tok.text]
        var = self.table.lookup(tok.text)
        if var is None or not self.table[var].is_original:
            raise ParseError(f"undeclared identifier '{tok.text}'", tok.line, tok.column)
        return var

    # -- arithmetic ----------------------------------------------------

    def arith(self, expr: SExpr) -> Polynomial:
        if isinstance(expr, Token):
            if expr.kind in ('numeral', 'decimal'):
                return Polynomial.constant(_numeral(expr))
            if expr.text in self.lets:
                return self.arith(self.lets[expr.text])
            var = self._var(expr)
            if self.table.sort(var) == VarSort.BOOL:
                raise ParseError(f"'{expr.text}' is Bool, expected a number", expr.line, expr.column)
            return Polynomial.var(var)
        op = _head(expr)
        args = expr.items[1:]
        if op is None:
            raise _error("expected an arithmetic term", expr)
        if op == '+':
            total = Polynomial()
            for a in args:
                total = total + self.arith(a)
            return total
        if op == '-':
            if not args:
                raise _error("'-' needs an argument", expr)
            first = self.arith(args[0])
            if len(args) == 1:
                return -first
            for a in args[1:]:
                first = first - self.arith(a)
            return first
        if op == '*':
            prod = Polynomial.constant(1)
            for a in args:
                prod = prod * self.arith(a)
            return prod
        if op == '/':
            parts = [self.arith(a) for a in args]
            if len(parts) != 2 or not all(p.is_constant for p in parts):
                raise _error("division is only supported between numerals", expr, UnsupportedConstructError)
            if parts[1].constant_term == 0:
                raise _error("division by zero", expr)
            return Polynomial.constant(parts[0].constant_term / parts[1].constant_term)
        if op == 'to_real':
            return self.arith(args[0])
        if op == 'let':
            return self._let(expr, self.arith)
        if op in UNSUPPORTED_OPS:
            raise _error(f"unsupported operator '{op}'", expr, UnsupportedConstructError)
        raise _error(f"unknown arithmetic operator '{op}'", expr, UnsupportedConstructError)

    # -- Boolean structure ---------------------------------------------

    def _is_bool_term(self, expr: SExpr) -> bool:
        if isinstance(expr, Token):
            if expr.text in ('true', 'false'):
                return True
            if expr.text in self.lets:
                return self._is_bool_term(self.lets[expr.text])
            if expr.kind != 'symbol':
                return False
            var = self.bound.get(expr.text, self.table.lookup(expr.text))
            return var is not None and self.table.sort(var) == VarSort.BOOL
        op = _head(expr)
        if op == 'ite':
            return self._is_bool_term(expr.items[2])
        if op == 'let':
            return self._is_bool_term(expr.items[2])
        return op in ('not', 'and', 'or', '=>', 'xor', '=', 'distinct', '<=', '<', '>=', '>', 'forall')

    def _compare(self, expr: Node, rel: Relation, flip: bool) -> BTerm:
        polys = [self.arith(a) for a in expr.items[1:]]
        if len(polys) < 2:
            raise _error("comparison needs two arguments", expr)
        parts = []
        for a, b in zip(polys, polys[1:]):
            lhs, rhs = (b, a) if flip else (a, b)
            parts.append(b_atom(make_atom(lhs - rhs, rel, self.table)))
        return parts[0] if len(parts) == 1 else b_and(*parts)

    def boolean(self, expr: SExpr) -> BTerm:
        if isinstance(expr, Token):
            if expr.text == 'true':
                return TRUE
            if expr.text == 'false':
                return FALSE
            if expr.text in self.lets:
                return self.boolean(self.lets[expr.text])
            var = self._var(expr)
            if self.table.sort(var) != VarSort.BOOL:
                raise ParseError(f"'{expr.text}' is not Bool", expr.line, expr.column)
            return BLit(Literal.boolean(var))
        op = _head(expr)
        args = expr.items[1:]
        if op is None:
            raise _error("expected a Boolean term", expr)
        if op == 'not':
            if len(args) != 1:
                raise _error("'not' takes one argument", expr)
            return BNot(self.boolean(args[0]))
        if op == 'and':
            return b_and(*(self.boolean(a) for a in args))
        if op == 'or':
            return b_or(*(self.boolean(a) for a in args))
        if op == '=>':
            terms = [self.boolean(a) for a in args]
            result = terms[-1]
            for t in reversed(terms[:-1]):
                result = b_implies(t, result)
            return result
        if op == 'xor':
            terms = [self.boolean(a) for a in args]
            result = terms[0]
            for t in terms[1:]:
                result = BNot(b_iff(result, t))
            return result
        if op == 'ite':
            if len(args) != 3:
                raise _error("'ite' takes three arguments", expr)
            if not self._is_bool_term(args[1]):
                raise _error("'ite' is only supported over Bool", expr, UnsupportedConstructError)
            return b_ite(self.boolean(args[0]), self.boolean(args[1]), self.boolean(args[2]))
        if op in ('=', 'distinct'):
            return self._equality(expr, args, op == 'distinct')
        if op == '<=':
            return self._compare(expr, Relation.LE, False)
        if op == '<':
            return self._compare(expr, Relation.LT, False)
        if op == '>=':
            return self._compare(expr, Relation.LE, True)
        if op == '>':
            return self._compare(expr, Relation.LT, True)
        if op == 'let':
            return self._let(expr, self.boolean)
        if op == 'forall':
            raise _error("quantifiers are only allowed at the top of an exists-forall assertion", expr,
                         UnsupportedConstructError)
        if op in UNSUPPORTED_OPS:
            raise _error(f"unsupported operator '{op}'", expr, UnsupportedConstructError)
        raise _error(f"unknown Boolean operator '{op}'", expr, UnsupportedConstructError)

    def _equality(self, expr: Node, args: Sequence[SExpr], distinct: bool) -> BTerm:
        if len(args) < 2:
            raise _error(f"'{_head(expr)}' needs two arguments", expr)
        if self._is_bool_term(args[0]):
            terms = [self.boolean(a) for a in args]
            pairs = [b_iff(a, b) for a, b in zip(terms, terms[1:])]
            if distinct:
                if len(terms) > 2:
                    return FALSE
                return BNot(pairs[0])
            return b_and(*pairs)
        polys = [self.arith(a) for a in args]
        if distinct:
            return b_and(*(
                BNot(b_atom(make_atom(polys[i] - polys[j], Relation.EQ, self.table)))
                for i in range(len(polys)) for j in range(i + 1, len(polys))
            ))
        return b_and(*(b_atom(make_atom(a - b, Relation.EQ, self.table)) for a, b in zip(polys, polys[1:])))

    def _let(self, expr: Node, translate: Callable[[SExpr], object]):
        if self.in_let:
            raise _error("nested let is not supported", expr, UnsupportedConstructError)
        if len(expr.items) != 3 or not isinstance(expr.items[1], Node):
            raise _error("malformed let", expr)
        saved = dict(self.lets)
        for binding in expr.items[1].items:
            if not isinstance(binding, Node) or len(binding.items) != 2 or not isinstance(binding.items[0], Token):
                raise _error("malformed let binding", binding)
            self.lets[binding.items[0].text] = binding.items[1]
        self.in_let = True
        try:
            return translate(expr.items[2])
        finally:
            self.in_let = False
            self.lets = saved


def _sort(tok: SExpr) -> VarSort:
    if not isinstance(tok, Token) or tok.text not in SORTS:
        raise _error("unsupported sort", tok, UnsupportedConstructError)
    return SORTS[tok.text]


def _weight(expr: Node) -> Fraction:
    weight = Fraction(1)
    rest = expr.items[2:]
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not isinstance(tok, Token) or tok.kind != 'keyword':
            raise _error("expected an attribute", tok)
        if i + 1 >= len(rest):
            raise _error(f"attribute {tok.text} has no value", tok)
        if tok.text == ':weight':
            value = rest[i + 1]
            translator = TermTranslator(VarTable())
            poly = translator.arith(value)
            if not poly.is_constant:
                raise _error("weight must be a number", value)
            weight = poly.constant_term
            if weight <= 0:
                raise _error("weight must be positive", value)
        i += 2
    return weight


def _walk(text: str, ea: bool) -> Tuple[Script, List[Tuple[SExpr, Optional[Fraction]]]]:
    """Run the commands; returns the script and the assertions in order."""
    script = Script()
    asserts: List[Tuple[SExpr, Optional[Fraction]]] = []
    check_sats = 0
    for cmd in read_sexprs(text):
        op = _head(cmd)
        if op is None:
            raise _error("expected a command", cmd)
        args = cmd.items[1:]
        if op == 'set-logic':
            logic = args[0].text if args and isinstance(args[0], Token) else None
            if logic not in LOGICS:
                raise _error(f"unsupported logic {logic}", cmd, UnsupportedConstructError)
            if (logic == 'NIA_EA') != ea:
                raise _error(f"logic {logic} needs the {'exists-forall' if logic == 'NIA_EA' else 'smt'} mode",
                             cmd)
            script.logic = logic
        elif op == 'set-info':
            if len(args) >= 2 and isinstance(args[0], Token) and args[0].text == ':status':
                script.expected_status = args[1].text
        elif op in ('set-option', 'exit'):
            pass
        elif op in ('declare-const', 'declare-fun'):
            if op == 'declare-fun':
                if len(args) != 3 or not isinstance(args[1], Node) or args[1].items:
                    raise _error("only 0-ary functions are supported", cmd, UnsupportedConstructError)
                name, sort = args[0], args[2]
            else:
                if len(args) != 2:
                    raise _error("malformed declare-const", cmd)
                name, sort = args
            if not isinstance(name, Token):
                raise _error("expected a name", cmd)
            try:
                script.table.add(name.text, _sort(sort))
            except ContractViolation:
                raise ParseError(f"'{name.text}' declared twice", name.line, name.column) from None
            script.declarations.append((name.text, sort.text))
        elif op == 'assert':
            if len(args) != 1:
                raise _error("assert takes one term", cmd)
            script.hard_asserts.append(args[0])
            asserts.append((args[0], None))
        elif op == 'assert-soft':
            if not args:
                raise _error("assert-soft needs a term", cmd)
            weight = _weight(cmd)
            script.soft_asserts.append((args[0], weight))
            asserts.append((args[0], weight))
        elif op == 'check-sat':
            check_sats += 1
            script.commands.append(op)
        elif op in ('get-model', 'get-objectives'):
            script.commands.append(op)
        else:
            raise _error(f"unsupported command '{op}'", cmd, UnsupportedConstructError)
    if check_sats != 1:
        raise ParseError(f"expected exactly one check-sat, found {check_sats}")
    return script, asserts


def parse_script(text: str) -> Script:
    """
    Parse a quantifier-free script into clauses.

    Returns:
        Script whose formula holds the hard and soft clauses

    Raises:
        ParseError: On lexical, sort or command errors (with line and column)
        UnsupportedConstructError: On constructs outside the supported subset
    """
    script, asserts = _walk(text, ea=False)
    translator = TermTranslator(script.table)
    clausifier = Clausifier(script.formula)
    for term, weight in asserts:
        bterm = translator.boolean(term)
        if weight is None:
            clausifier.add_hard(bterm)
        else:
            clausifier.add_soft(bterm, Weight.soft(weight))
    logger.debug(
        f"parsed {len(script.declarations)} declarations, {len(script.formula.hard)} hard and "
        f"{len(script.formula.soft)} soft clauses"
    )
    return script


def _scoped_name(table: VarTable, name: str) -> str:
    # a forall binder may shadow a constant or reuse an earlier binder's name
    if table.lookup(name) is None:
        return name
    n = 1
    while table.lookup(f"{name}!{n}") is not None:
        n += 1
    return f"{name}!{n}"


def parse_ea_script(text: str) -> EaProblem:
    """
    Parse an exists-forall script.

    Free variables are existential; each assertion may bind Real universal
    variables with one top-level ``forall``. Bodies are distributed into
    clauses.

    Raises:
        ParseError: On malformed input or sort errors
        UnsupportedConstructError: On soft bodies that are not a single clause
    """
    script, asserts = _walk(text, ea=True)
    table = script.table
    formula = script.formula
    univ: List[int] = []
    for term, weight in asserts:
        bound: Dict[str, int] = {}
        body = term
        if _head(term) == 'forall':
            if len(term.items) != 3 or not isinstance(term.items[1], Node):
                raise _error("malformed forall", term)
            for binding in term.items[1].items:
                if not isinstance(binding, Node) or len(binding.items) != 2 or not isinstance(binding.items[0], Token):
                    raise _error("malformed forall binding", binding)
                name = binding.items[0]
                if _sort(binding.items[1]) != VarSort.REAL:
                    raise _error("universal variables must be Real", binding, UnsupportedConstructError)
                if name.text in bound:
                    raise ParseError(f"'{name.text}' bound twice", name.line, name.column)
                var = table.add(_scoped_name(table, name.text), VarSort.REAL)
                bound[name.text] = var
                univ.append(var)
            body = term.items[2]
        translator = TermTranslator(table, bound)
        clauses = distribute(translator.boolean(body), table)
        if weight is None:
            for c in clauses:
                formula.add_hard(c)
        else:
            if len(clauses) != 1:
                raise _error("a soft exists-forall assertion must be a single clause", term,
                             UnsupportedConstructError)
            formula.add_soft(clauses[0], Weight.soft(weight))
    exist = [v for v in table.originals() if v not in univ]
    for v in exist:
        if table.sort(v) == VarSort.REAL:
            raise ParseError(f"existential variable '{table.name(v)}' must be Int or Bool")
    return EaProblem(formula, exist, univ)


def _value(expr: SExpr) -> Fraction:
    if isinstance(expr, Token):
        if expr.text == 'true':
            return Fraction(1)
        if expr.text == 'false':
            return Fraction(0)
        if expr.kind in ('numeral', 'decimal'):
            return _numeral(expr)
        raise _error(f"not a value: {expr.text}", expr)
    op = _head(expr)
    args = expr.items[1:]
    if op == '-' and len(args) == 1:
        return -_value(args[0])
    if op == '/' and len(args) == 2:
        return _value(args[0]) / _value(args[1])
    raise _error("not a value", expr)


def parse_model(text: str) -> Dict[str, Fraction]:
    """
    Read ``(define-fun name () Sort value)`` entries, inside ``(model ...)`` or not.

    Lines that are not s-expressions (such as a leading ``sat``) are ignored.
    """
    values: Dict[str, Fraction] = {}

    def visit(expr: SExpr) -> None:
        if not isinstance(expr, Node):
            return
        if _head(expr) == 'define-fun':
            if len(expr.items) != 5 or not isinstance(expr.items[1], Token):
                raise _error("malformed define-fun", expr)
            values[expr.items[1].text] = _value(expr.items[4])
            return
        for item in expr.items:
            visit(item)

    for expr in read_sexprs(text):
        visit(expr)
    return values
