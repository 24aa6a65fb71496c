"""Parser for the SMT-LIB2 subset: QF_LRA scripts with 0-ary declarations.

Accepted commands: ``set-logic`` (QF_LRA only), ``set-option``, ``set-info``,
``declare-const``, ``declare-fun`` (arity 0), ``assert``, ``check-sat``,
``get-model``, ``exit``.  Multiple asserts are conjoined.  Real-valued ``ite``
is lifted into Boolean structure by case splitting, so theory atoms stay
purely linear.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .atoms import AtomTable
from .terms import Term, TermBank, normalize_linear


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class UnsupportedConstructError(ParseError):
    def __init__(self, construct: str, line: int = 0, col: int = 0):
        super().__init__(f"unsupported construct: {construct}", line, col)
        self.construct = construct


# -- tokenizer / s-expression reader --------------------------------------


@dataclass
class SExpr:
    """Either an atom token (``text`` set) or a list (``items`` set)."""

    line: int
    col: int
    text: Optional[str] = None
    items: Optional[List["SExpr"]] = None

    @property
    def is_atom(self) -> bool:
        return self.text is not None


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            col += 1
            i += 1
        elif ch == "|":
            start_line, start_col = line, col
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", start_line, start_col)
            tok = text[i : j + 1]
            for c in tok:
                if c == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            yield tok, start_line, start_col
            i = j + 1
        elif ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            else:
                raise ParseError("unterminated string", start_line, start_col)
            tok = text[i : j + 1]
            col += j + 1 - i
            yield tok, start_line, start_col
            i = j + 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            yield text[start:i], line, start_col


def read_script(text: str) -> List[SExpr]:
    """Read all top-level s-expressions with source positions."""
    stack: List[SExpr] = []
    top: List[SExpr] = []
    for tok, line, col in _tokenize(text):
        if tok == "(":
            stack.append(SExpr(line, col, items=[]))
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            node = SExpr(line, col, text=tok)
            (stack[-1].items if stack else top).append(node)
    if stack:
        raise ParseError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


# -- expression conversion -------------------------------------------------

# A real-valued expression is a linear form, or a decision tree over linear
# forms produced by lifting real-valued ite nodes.
LinExpr = Tuple[Dict[str, Fraction], Fraction]


@dataclass
class RealBranch:
    cond: Term
    then: "RealValue"
    other: "RealValue"


RealValue = Union[LinExpr, RealBranch]

_QUANTIFIERS = {"forall", "exists", "let*", "match", "lambda"}
_NUMERIC = set("0123456789")


def _is_numeral(s: str) -> bool:
    body = s
    return bool(body) and all(c in _NUMERIC for c in body)


def _is_decimal(s: str) -> bool:
    if "." not in s:
        return False
    a, _, b = s.partition(".")
    return bool(a) and bool(b) and all(c in _NUMERIC for c in a + b)


class _Converter:
    def __init__(self, bank: TermBank, table: AtomTable):
        self.bank = bank
        self.table = table
        self.sorts: Dict[str, str] = {}  # declared 0-ary symbols -> "Bool" | "Real"

    # tagged value: ("bool", Term) or ("real", RealValue)
    def convert(self, node: SExpr, env: Dict[str, tuple]) -> tuple:
        if node.is_atom:
            return self._atom_token(node, env)
        items = node.items or []
        if not items or not items[0].is_atom:
            raise ParseError("expected operator", node.line, node.col)
        op = items[0].text
        args = items[1:]
        if op in _QUANTIFIERS:
            raise UnsupportedConstructError(op, node.line, node.col)
        if op == "let":
            return self._let(node, args, env)
        if op in ("and", "or"):
            terms = [self._bool(a, env) for a in self._at_least(node, args, 1)]
            return ("bool", self.bank.and_(terms) if op == "and" else self.bank.or_(terms))
        if op == "not":
            (a,) = self._exactly(node, args, 1)
            return ("bool", self.bank.not_(self._bool(a, env)))
        if op == "=>":
            terms = [self._bool(a, env) for a in self._at_least(node, args, 2)]
            out = terms[-1]
            for t in reversed(terms[:-1]):
                out = self.bank.implies(t, out)
            return ("bool", out)
        if op == "xor":
            terms = [self._bool(a, env) for a in self._at_least(node, args, 2)]
            out = terms[0]
            for t in terms[1:]:
                out = self.bank.not_(self.bank.iff(out, t))
            return ("bool", out)
        if op == "=":
            return self._equality(node, args, env)
        if op == "distinct":
            return self._distinct(node, args, env)
        if op in ("<=", "<", ">=", ">"):
            a, b = self._exactly(node, args, 2)
            return ("bool", self._relation(op, self._real(a, env), self._real(b, env)))
        if op == "ite":
            return self._ite(node, args, env)
        if op == "+":
            vals = [self._real(a, env) for a in self._at_least(node, args, 1)]
            out = vals[0]
            for v in vals[1:]:
                out = self._combine(out, v, self._add)
            return ("real", out)
        if op == "-":
            vals = [self._real(a, env) for a in self._at_least(node, args, 1)]
            if len(vals) == 1:
                return ("real", self._map_linear(vals[0], self._neg_lin))
            out = vals[0]
            for v in vals[1:]:
                out = self._combine(out, self._map_linear(v, self._neg_lin), self._add)
            return ("real", out)
        if op == "*":
            a, b = self._exactly(node, args, 2)
            return ("real", self._multiply(node, self._real(a, env), self._real(b, env)))
        if op == "/":
            a, b = self._exactly(node, args, 2)
            return ("real", self._divide(node, self._real(a, env), self._real(b, env)))
        raise UnsupportedConstructError(op, node.line, node.col)

    # -- helpers ----------------------------------------------------------

    def _at_least(self, node: SExpr, args: List[SExpr], k: int) -> List[SExpr]:
        if len(args) < k:
            raise ParseError("too few arguments", node.line, node.col)
        return args

    def _exactly(self, node: SExpr, args: List[SExpr], k: int) -> List[SExpr]:
        if len(args) != k:
            raise ParseError(f"expected {k} arguments", node.line, node.col)
        return args

    def _atom_token(self, node: SExpr, env: Dict[str, tuple]) -> tuple:
        s = node.text
        assert s is not None
        if s == "true":
            return ("bool", self.bank.const(True))
        if s == "false":
            return ("bool", self.bank.const(False))
        if _is_numeral(s):
            return ("real", ({}, Fraction(int(s))))
        if _is_decimal(s):
            a, _, b = s.partition(".")
            return ("real", ({}, Fraction(int(a + b), 10 ** len(b))))
        name = s[1:-1] if s.startswith("|") and s.endswith("|") else s
        if name in env:
            return env[name]
        sort = self.sorts.get(name)
        if sort == "Bool":
            atom = self.bank.bool_atom(name)
            self.table.register(atom)
            return ("bool", atom)
        if sort == "Real":
            return ("real", ({name: Fraction(1)}, Fraction(0)))
        raise ParseError(f"undeclared symbol '{name}'", node.line, node.col)

    def _bool(self, node: SExpr, env: Dict[str, tuple]) -> Term:
        tag, val = self.convert(node, env)
        if tag != "bool":
            raise ParseError("expected a Bool expression", node.line, node.col)
        return val

    def _real(self, node: SExpr, env: Dict[str, tuple]) -> RealValue:
        tag, val = self.convert(node, env)
        if tag != "real":
            raise ParseError("expected a Real expression", node.line, node.col)
        return val

    def _let(self, node: SExpr, args: List[SExpr], env: Dict[str, tuple]) -> tuple:
        if len(args) != 2 or args[0].is_atom:
            raise ParseError("malformed let", node.line, node.col)
        new_env = dict(env)
        for binding in args[0].items or []:
            if binding.is_atom or len(binding.items or []) != 2 or not binding.items[0].is_atom:
                raise ParseError("malformed let binding", binding.line, binding.col)
            name = binding.items[0].text
            new_env[name] = self.convert(binding.items[1], env)
        return self.convert(args[1], new_env)

    # linear arithmetic on (coeffs, const) pairs

    @staticmethod
    def _add(a: LinExpr, b: LinExpr) -> LinExpr:
        coeffs = dict(a[0])
        for name, c in b[0].items():
            coeffs[name] = coeffs.get(name, Fraction(0)) + c
        return coeffs, a[1] + b[1]

    @staticmethod
    def _neg_lin(a: LinExpr) -> LinExpr:
        return {n: -c for n, c in a[0].items()}, -a[1]

    def _map_linear(self, v: RealValue, f) -> RealValue:
        if isinstance(v, RealBranch):
            return RealBranch(v.cond, self._map_linear(v.then, f), self._map_linear(v.other, f))
        return f(v)

    def _combine(self, a: RealValue, b: RealValue, f) -> RealValue:
        if isinstance(a, RealBranch):
            return RealBranch(a.cond, self._combine(a.then, b, f), self._combine(a.other, b, f))
        if isinstance(b, RealBranch):
            return RealBranch(b.cond, self._combine(a, b.then, f), self._combine(a, b.other, f))
        return f(a, b)

    def _multiply(self, node: SExpr, a: RealValue, b: RealValue) -> RealValue:
        def mul(x: LinExpr, y: LinExpr) -> LinExpr:
            if x[0] and y[0]:
                raise UnsupportedConstructError(
                    "nonlinear multiplication", node.line, node.col
                )
            if y[0]:
                x, y = y, x
            k = y[1]
            return {n: c * k for n, c in x[0].items() if c * k != 0}, x[1] * k

        return self._combine(a, b, mul)

    def _divide(self, node: SExpr, a: RealValue, b: RealValue) -> RealValue:
        def div(x: LinExpr, y: LinExpr) -> LinExpr:
            if y[0]:
                raise UnsupportedConstructError(
                    "division by a non-constant", node.line, node.col
                )
            if y[1] == 0:
                raise ParseError("division by zero", node.line, node.col)
            k = y[1]
            return {n: c / k for n, c in x[0].items()}, x[1] / k

        return self._combine(a, b, div)

    def _relation(self, op: str, lhs: RealValue, rhs: RealValue) -> Term:
        if isinstance(lhs, RealBranch):
            return self.bank.ite(
                lhs.cond,
                self._relation(op, lhs.then, rhs),
                self._relation(op, lhs.other, rhs),
            )
        if isinstance(rhs, RealBranch):
            return self.bank.ite(
                rhs.cond,
                self._relation(op, lhs, rhs.then),
                self._relation(op, lhs, rhs.other),
            )
        coeffs, const = self._add(lhs, self._neg_lin(rhs))
        atom = normalize_linear(coeffs, op, -const)
        if isinstance(atom, bool):
            return self.bank.const(atom)
        term = self.bank.theory_atom(atom)
        self.table.register(term)
        return term

    def _equality(self, node: SExpr, args: List[SExpr], env: Dict[str, tuple]) -> tuple:
        vals = [self.convert(a, env) for a in self._at_least(node, args, 2)]
        tags = {tag for tag, _ in vals}
        if len(tags) != 1:
            raise ParseError("'=' arguments must share a sort", node.line, node.col)
        parts = []
        if tags == {"bool"}:
            for (_, a), (_, b) in zip(vals, vals[1:]):
                parts.append(self.bank.iff(a, b))
        else:
            for (_, a), (_, b) in zip(vals, vals[1:]):
                parts.append(self._relation("=", a, b))
        return ("bool", self.bank.and_(parts))

    def _distinct(self, node: SExpr, args: List[SExpr], env: Dict[str, tuple]) -> tuple:
        vals = [self.convert(a, env) for a in self._at_least(node, args, 2)]
        tags = {tag for tag, _ in vals}
        if len(tags) != 1:
            raise ParseError("'distinct' arguments must share a sort", node.line, node.col)
        if tags == {"bool"}:
            if len(vals) > 2:
                return ("bool", self.bank.const(False))
            return ("bool", self.bank.not_(self.bank.iff(vals[0][1], vals[1][1])))
        parts = []
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                parts.append(self.bank.not_(self._relation("=", vals[i][1], vals[j][1])))
        return ("bool", self.bank.and_(parts))

    def _ite(self, node: SExpr, args: List[SExpr], env: Dict[str, tuple]) -> tuple:
        c_node, t_node, e_node = self._exactly(node, args, 3)
        cond = self._bool(c_node, env)
        t_tag, t_val = self.convert(t_node, env)
        e_tag, e_val = self.convert(e_node, env)
        if t_tag != e_tag:
            raise ParseError("ite branches must share a sort", node.line, node.col)
        if t_tag == "bool":
            return ("bool", self.bank.ite(cond, t_val, e_val))
        return ("real", RealBranch(cond, t_val, e_val))


_IGNORED_COMMANDS = {"set-option", "set-info", "check-sat", "get-model", "exit", "echo"}


def parse_smtlib(
    text: str,
    bank: Optional[TermBank] = None,
    table: Optional[AtomTable] = None,
) -> Tuple[Term, AtomTable]:
    """Parse an SMT-LIB2 script; return the conjoined assertion and atom table.

    Passing an existing bank/table pair makes atoms of the new script intern
    into the same index space (used to read lemma files against an instance).
    """
    bank = bank or TermBank()
    table = table or AtomTable(bank)
    conv = _Converter(bank, table)
    assertions: List[Term] = []
    for cmd in read_script(text):
        if cmd.is_atom:
            raise ParseError(f"stray token '{cmd.text}'", cmd.line, cmd.col)
        items = cmd.items or []
        if not items or not items[0].is_atom:
            raise ParseError("malformed command", cmd.line, cmd.col)
        head = items[0].text
        if head == "set-logic":
            if len(items) != 2 or not items[1].is_atom:
                raise ParseError("malformed set-logic", cmd.line, cmd.col)
            if items[1].text != "QF_LRA":
                raise UnsupportedConstructError(
                    f"logic {items[1].text}", cmd.line, cmd.col
                )
        elif head == "declare-const":
            if len(items) != 3 or not items[1].is_atom or not items[2].is_atom:
                raise ParseError("malformed declare-const", cmd.line, cmd.col)
            _declare(conv, items[1], items[2], cmd)
        elif head == "declare-fun":
            if len(items) != 4 or not items[1].is_atom or items[2].is_atom or not items[3].is_atom:
                raise ParseError("malformed declare-fun", cmd.line, cmd.col)
            if items[2].items:
                raise UnsupportedConstructError(
                    "uninterpreted function of arity > 0", cmd.line, cmd.col
                )
            _declare(conv, items[1], items[3], cmd)
        elif head == "assert":
            if len(items) != 2:
                raise ParseError("malformed assert", cmd.line, cmd.col)
            assertions.append(conv._bool(items[1], {}))
        elif head in _IGNORED_COMMANDS:
            continue
        elif head in ("push", "pop", "define-fun", "declare-sort", "define-sort"):
            raise UnsupportedConstructError(head, cmd.line, cmd.col)
        else:
            raise ParseError(f"unknown command '{head}'", cmd.line, cmd.col)
    return bank.and_(assertions), table


def _declare(conv: _Converter, name_node: SExpr, sort_node: SExpr, cmd: SExpr) -> None:
    name = name_node.text
    if name.startswith("|") and name.endswith("|"):
        name = name[1:-1]
    sort = sort_node.text
    if sort not in ("Bool", "Real"):
        raise UnsupportedConstructError(f"sort {sort}", cmd.line, cmd.col)
    previous = conv.sorts.get(name)
    if previous is not None and previous != sort:
        raise ParseError(f"symbol '{name}' redeclared with a different sort", cmd.line, cmd.col)
    conv.sorts[name] = sort


def parse_file(path, bank=None, table=None) -> Tuple[Term, AtomTable]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_smtlib(fh.read(), bank, table)
