"""A minimal SMT-LIB2 solver over stdin/stdout for QF_LRA conjunctions.

Understands exactly the dialect the external oracle speaks: options, one
logic, 0-ary Real declarations, push/pop, named asserts of linear-arithmetic
literals, check-sat, get-unsat-core, get-value.  Satisfiability is decided by
an exact rational two-phase simplex with Bland's rule (disequalities by case
split, strict inequalities via a maximized slack), so it shares no decision
code with the library's Fourier-Motzkin backend and can serve as a
cross-check:

    tlemma enumerate --oracle-cmd "python3 -m tlemma.ref_solver" ...

``get-unsat-core`` returns all asserted names (a valid, not necessarily
minimal, core).  Intentionally bad behavior for protocol tests: set
TLEMMA_REF_MODE=unknown (answers unknown) or =die (exits before answering).
"""

from __future__ import annotations

import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Tuple


def _read_sexpr(stream) -> Optional[list]:
    """Next s-expression from the stream as nested lists of strings."""
    depth = 0
    tokens: List[str] = []
    buf = []

    def flush():
        if buf:
            tokens.append("".join(buf))
            buf.clear()

    while True:
        ch = stream.read(1)
        if ch == "":
            return None
        if ch == ";":
            while ch not in ("", "\n"):
                ch = stream.read(1)
            continue
        if ch in " \t\r\n":
            flush()
            if depth == 0 and tokens:
                break
            continue
        if ch == "(":
            flush()
            tokens.append("(")
            depth += 1
        elif ch == ")":
            flush()
            tokens.append(")")
            depth -= 1
            if depth == 0:
                break
        else:
            buf.append(ch)
    flush()

    pos = 0

    def parse():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok != "(":
            return tok
        items = []
        while tokens[pos] != ")":
            items.append(parse())
        pos += 1
        return items

    return parse() if tokens else None


Linear = Tuple[Dict[str, Fraction], Fraction]  # coeffs, constant


def _linear(node) -> Linear:
    if isinstance(node, str):
        try:
            return {}, Fraction(node)
        except ValueError:
            return {node: Fraction(1)}, Fraction(0)
    op, args = node[0], node[1:]
    if op == "+":
        coeffs: Dict[str, Fraction] = {}
        const = Fraction(0)
        for a in args:
            c, k = _linear(a)
            const += k
            for n, v in c.items():
                coeffs[n] = coeffs.get(n, Fraction(0)) + v
        return coeffs, const
    if op == "-":
        if len(args) == 1:
            c, k = _linear(args[0])
            return {n: -v for n, v in c.items()}, -k
        coeffs, const = _linear(args[0])
        coeffs = dict(coeffs)
        for a in args[1:]:
            c, k = _linear(a)
            const -= k
            for n, v in c.items():
                coeffs[n] = coeffs.get(n, Fraction(0)) - v
        return coeffs, const
    if op == "*":
        (c1, k1), (c2, k2) = _linear(args[0]), _linear(args[1])
        if c1 and c2:
            raise ValueError("nonlinear")
        if c1:
            return {n: v * k2 for n, v in c1.items()}, k1 * k2
        return {n: v * k1 for n, v in c2.items()}, k1 * k2
    if op == "/":
        (c1, k1), (c2, k2) = _linear(args[0]), _linear(args[1])
        if c2:
            raise ValueError("nonlinear")
        return {n: v / k2 for n, v in c1.items()}, k1 / k2
    raise ValueError(f"bad arithmetic operator {op}")


# A constraint: (coeffs, bound, kind) with kind in le/lt/eq/ne.
Constraint = Tuple[Dict[str, Fraction], Fraction, str]

_NEGATE = {"<=": ">", "<": ">=", ">=": "<", ">": "<=", "=": "ne"}
_KIND = {"<=": "le", "<": "lt", ">=": "ge", ">": "gt", "=": "eq", "ne": "ne"}


def _constraint(node, negated: bool = False) -> Constraint:
    if node[0] == "not":
        return _constraint(node[1], not negated)
    op = node[0]
    if negated:
        op = _NEGATE[op]
    lhs_c, lhs_k = _linear(node[1])
    rhs_c, rhs_k = _linear(node[2])
    coeffs = dict(lhs_c)
    for n, v in rhs_c.items():
        coeffs[n] = coeffs.get(n, Fraction(0)) - v
    bound = rhs_k - lhs_k
    kind = _KIND[op]
    if kind == "ge":
        coeffs, bound, kind = {n: -v for n, v in coeffs.items()}, -bound, "le"
    elif kind == "gt":
        coeffs, bound, kind = {n: -v for n, v in coeffs.items()}, -bound, "lt"
    coeffs = {n: v for n, v in coeffs.items() if v != 0}
    return coeffs, bound, kind


# -- exact two-phase simplex ------------------------------------------------
#
# maximize obj . z   subject to   A z = b,  z >= 0
# with Bland's rule (entering: lowest eligible column; leaving: lowest basic
# variable among ratio-test ties), which cannot cycle.


class _Unbounded(Exception):
    pass


def _pivot(tableau: List[List[Fraction]], basis: List[int], row: int, col: int) -> None:
    piv = tableau[row][col]
    tableau[row] = [v / piv for v in tableau[row]]
    for r, line in enumerate(tableau):
        if r != row and line[col] != 0:
            factor = line[col]
            tableau[r] = [v - factor * p for v, p in zip(line, tableau[row])]
    basis[row] = col


def _run_simplex(tableau: List[List[Fraction]], basis: List[int]) -> None:
    """Drive the objective row (last) to optimality in place."""
    m = len(tableau) - 1
    width = len(tableau[0]) - 1
    while True:
        obj = tableau[-1]
        col = next((j for j in range(width) if obj[j] < 0), None)
        if col is None:
            return
        best_row = None
        best_ratio = None
        for i in range(m):
            a = tableau[i][col]
            if a > 0:
                ratio = tableau[i][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row is None:
            raise _Unbounded()
        _pivot(tableau, basis, best_row, col)


def lp_feasible(rows: List[Constraint]):
    """Exact feasibility of le/lt/eq rows over free rational variables.

    Strict rows get a shared slack that the second phase maximizes (capped at
    one); the system is satisfiable iff phase one succeeds and, when strict
    rows exist, the maximized slack is positive.  Returns a model dict or
    None.
    """
    names = sorted({n for coeffs, _, _ in rows for n in coeffs})
    strict = any(kind == "lt" for _, _, kind in rows)
    # columns: x+ / x- per free variable, then the strictness slack
    col_of = {name: 2 * i for i, name in enumerate(names)}
    eps_col = 2 * len(names)
    n_struct = eps_col + (1 if strict else 0)

    work = [(coeffs, bound, kind) for coeffs, bound, kind in rows]
    if strict:
        work.append(({}, Fraction(1), "eps_cap"))  # eps <= 1

    # structural part of each equality row, before slacks/artificials
    lines: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    slack_rows: List[int] = []
    for coeffs, bound, kind in work:
        line = [Fraction(0)] * n_struct
        for n, v in coeffs.items():
            line[col_of[n]] += v
            line[col_of[n] + 1] -= v
        if kind == "lt":
            line[eps_col] += 1
        if kind == "eps_cap":
            line[eps_col] += 1
        lines.append(line)
        rhs.append(Fraction(bound))
        if kind in ("le", "lt", "eps_cap"):
            slack_rows.append(len(lines) - 1)

    m = len(lines)
    n_slack = len(slack_rows)
    total = n_struct + n_slack + m  # + one artificial per row
    tableau: List[List[Fraction]] = []
    basis: List[int] = []
    slack_index = {r: n_struct + k for k, r in enumerate(slack_rows)}
    for i in range(m):
        row = lines[i] + [Fraction(0)] * (n_slack + m) + [rhs[i]]
        if i in slack_index:
            row[slack_index[i]] = Fraction(1)
        if row[-1] < 0:
            row = [-v for v in row]
        row[n_struct + n_slack + i] = Fraction(1)
        tableau.append(row)
        basis.append(n_struct + n_slack + i)

    # phase one: minimize the artificial sum (as maximize its negation)
    obj = [Fraction(0)] * (total + 1)
    for j in range(n_struct + n_slack, total):
        obj[j] = Fraction(1)
    for i in range(m):
        obj = [o - t for o, t in zip(obj, tableau[i])]
    tableau.append(obj)
    try:
        _run_simplex(tableau, basis)
    except _Unbounded:  # cannot happen: phase-1 objective is bounded
        raise AssertionError("phase-1 simplex diverged")
    if tableau[-1][-1] != 0:
        return None
    tableau.pop()
    # Drive lingering zero-level artificials out of the basis, drop redundant
    # rows, then cut the artificial columns so phase two cannot re-enter them.
    width = n_struct + n_slack
    keep = []
    for i in range(m):
        if basis[i] >= width:
            col = next((j for j in range(width) if tableau[i][j] != 0), None)
            if col is None:
                continue  # 0 = 0 row
            _pivot(tableau, basis, i, col)
        keep.append(i)
    tableau = [tableau[i][:width] + [tableau[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]
    m = len(tableau)

    # phase two: maximize the strictness slack (or nothing to do)
    if strict:
        obj = [Fraction(0)] * (width + 1)
        obj[eps_col] = Fraction(-1)  # maximize eps
        tableau.append(obj)
        for i in range(m):
            factor = tableau[-1][basis[i]]
            if factor != 0:
                tableau[-1] = [
                    v - factor * p for v, p in zip(tableau[-1], tableau[i])
                ]
        try:
            _run_simplex(tableau, basis)
        except _Unbounded:
            raise AssertionError("phase-2 objective is capped but diverged")
        tableau.pop()

    values = [Fraction(0)] * width
    for i in range(m):
        values[basis[i]] = tableau[i][-1]
    if strict and values[eps_col] <= 0:
        return None
    model = {}
    for name in names:
        model[name] = values[col_of[name]] - values[col_of[name] + 1]
    return model


def satisfiable(rows: List[Constraint]):
    """Case-split disequalities, fold constant rows, then run the simplex."""
    for i, (coeffs, bound, kind) in enumerate(rows):
        if kind == "ne" and coeffs:
            rest = rows[:i] + rows[i + 1 :]
            neg = {n: -v for n, v in coeffs.items()}
            for branch in ((coeffs, bound, "lt"), (neg, -bound, "lt")):
                model = satisfiable(rest + [branch])
                if model is not None:
                    return model
            return None
    pending = []
    for coeffs, bound, kind in rows:
        if coeffs:
            pending.append((coeffs, bound, kind))
            continue
        zero = Fraction(0)
        ok = (
            zero <= bound
            if kind == "le"
            else zero < bound
            if kind == "lt"
            else zero == bound
            if kind == "eq"
            else zero != bound
        )
        if not ok:
            return None
    return lp_feasible(pending)


class _Solver:
    def __init__(self) -> None:
        self.stack: List[List[Tuple[str, Constraint]]] = [[]]
        self.last_model: Optional[Dict[str, Fraction]] = None

    def run(self) -> None:
        mode = os.environ.get("TLEMMA_REF_MODE", "")
        out = sys.stdout
        while True:
            node = _read_sexpr(sys.stdin)
            if node is None:
                return
            if not isinstance(node, list) or not node:
                continue
            head = node[0]
            if head == "exit":
                return
            if head in ("set-option", "set-logic", "set-info", "declare-const",
                        "declare-fun"):
                continue
            if head == "push":
                self.stack.append([])
            elif head == "pop":
                if len(self.stack) > 1:
                    self.stack.pop()
            elif head == "assert":
                body = node[1]
                name = ""
                if isinstance(body, list) and body and body[0] == "!":
                    name = body[3] if len(body) > 3 else ""
                    body = body[1]
                self.stack[-1].append((name, _constraint(body)))
            elif head == "check-sat":
                if mode == "die":
                    sys.exit(1)
                if mode == "unknown":
                    print("unknown", file=out, flush=True)
                    continue
                rows = [c for frame in self.stack for _, c in frame]
                self.last_model = satisfiable(rows)
                print("sat" if self.last_model is not None else "unsat",
                      file=out, flush=True)
            elif head == "get-unsat-core":
                names = [n for frame in self.stack for n, _ in frame if n]
                print("(" + " ".join(names) + ")", file=out, flush=True)
            elif head == "get-value":
                model = self.last_model or {}
                parts = []
                for name in node[1]:
                    q = model.get(name, Fraction(0))
                    if q.denominator == 1:
                        v = str(q.numerator) if q >= 0 else f"(- {-q.numerator})"
                    elif q >= 0:
                        v = f"(/ {q.numerator} {q.denominator})"
                    else:
                        v = f"(- (/ {-q.numerator} {q.denominator}))"
                    parts.append(f"({name} {v})")
                print("(" + " ".join(parts) + ")", file=out, flush=True)
            else:
                print(f'(error "unknown command {head}")', file=out, flush=True)


def main() -> None:
    _Solver().run()


if __name__ == "__main__":
    main()
