"""Seeded random SMT-LIB instance generation.

Formulas nest Boolean operators (chosen uniformly among and/or/not/iff) down
to a given depth; leaves are uniformly Boolean atoms or linear-arithmetic
atoms (fresh or reused).  Fresh arithmetic atoms use 1-3 variables, integer
coefficients in [-4, 4], a uniformly chosen relation, and an integer bound in
[-8, 8].  Output is plain text, so identical parameters and seed yield
byte-identical files.
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import List, Optional, Set

_OPS = ("and", "or", "not", "iff")
_RELATIONS = ("<=", "<", ">=", ">", "=")
_REUSE_THEORY_P = 0.3


class _Gen:
    def __init__(self, rng: random.Random, n_bool: int, n_real: int,
                 max_atoms: Optional[int]):
        self.rng = rng
        self.bool_pool = [f"b{i}" for i in range(n_bool)]
        self.real_pool = [f"x{i}" for i in range(n_real)]
        self.used_bools: List[str] = []
        self.used_bool_set: Set[str] = set()
        self.theory_atoms: List[str] = []
        self.max_atoms = max_atoms

    def _atom_budget_left(self) -> bool:
        if self.max_atoms is None:
            return True
        return len(self.used_bools) + len(self.theory_atoms) < self.max_atoms

    def _bool_leaf(self) -> str:
        if self._atom_budget_left() or not self.used_bools:
            name = self.rng.choice(self.bool_pool)
            if name not in self.used_bool_set:
                self.used_bool_set.add(name)
                self.used_bools.append(name)
            return name
        return self.rng.choice(self.used_bools)

    def _fresh_theory_atom(self) -> str:
        k = self.rng.randint(1, min(3, len(self.real_pool)))
        names = self.rng.sample(self.real_pool, k)
        terms = []
        for name in sorted(names):
            c = self.rng.choice([-4, -3, -2, -1, 1, 2, 3, 4])
            if c == 1:
                terms.append(name)
            elif c >= 0:
                terms.append(f"(* {c} {name})")
            else:
                terms.append(f"(* (- {-c}) {name})")
        lhs = terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"
        rel = self.rng.choice(_RELATIONS)
        bound = self.rng.randint(-8, 8)
        rhs = str(bound) if bound >= 0 else f"(- {-bound})"
        return f"({rel} {lhs} {rhs})"

    def _theory_leaf(self) -> str:
        reuse = self.theory_atoms and (
            not self._atom_budget_left() or self.rng.random() < _REUSE_THEORY_P
        )
        if reuse:
            return self.rng.choice(self.theory_atoms)
        atom = self._fresh_theory_atom()
        self.theory_atoms.append(atom)
        return atom

    def leaf(self) -> str:
        pick_bool = self.rng.random() < 0.5
        if not self.bool_pool:
            pick_bool = False
        if not self.real_pool:
            pick_bool = True
        if pick_bool:
            return self._bool_leaf()
        return self._theory_leaf()

    def formula(self, depth: int) -> str:
        if depth <= 1:
            return self.leaf()
        op = self.rng.choice(_OPS)
        if op == "not":
            return f"(not {self.formula(depth - 1)})"
        a = self.formula(depth - 1)
        b = self.formula(depth - 1)
        if op == "iff":
            return f"(= {a} {b})"
        return f"({op} {a} {b})"


def random_instance(
    depth: int,
    n_bool: int,
    n_real: int,
    seed: int,
    max_atoms: Optional[int] = None,
) -> str:
    """One SMT-LIB script; deterministic for fixed parameters."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    gen = _Gen(random.Random(seed), n_bool, n_real, max_atoms)
    body = gen.formula(depth)
    used_reals = sorted(
        {name for atom in gen.theory_atoms for name in _names_in(atom, gen.real_pool)}
    )
    lines = ["(set-logic QF_LRA)"]
    for name in sorted(gen.used_bool_set):
        lines.append(f"(declare-const {name} Bool)")
    for name in used_reals:
        lines.append(f"(declare-const {name} Real)")
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _names_in(atom: str, pool: List[str]) -> List[str]:
    tokens = atom.replace("(", " ").replace(")", " ").split()
    pool_set = set(pool)
    return [t for t in tokens if t in pool_set]


def write_corpus(
    out_dir,
    count: int,
    depth: int,
    n_bool: int,
    n_real: int,
    seed: int,
    max_atoms: Optional[int] = None,
) -> List[Path]:
    """Write ``count`` instances; file k uses seed ``seed + k``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(count):
        text = random_instance(depth, n_bool, n_real, seed + k, max_atoms)
        path = out / f"gen_d{depth}_s{seed + k}.smt2"
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths


def product_instance(seed: int, n_groups: int = 2, per_group: int = 3) -> str:
    """Conjunction of independent subformulas over disjoint variable groups.

    Each group contributes a disjunction of chained interval constraints on
    its own variable, crafted so that some satisfying assignments are
    theory-inconsistent within the group.
    """
    rng = random.Random(seed)
    lines = ["(set-logic QF_LRA)"]
    parts = []
    for g in range(n_groups):
        var = f"v{g}"
        lines.append(f"(declare-const {var} Real)")
        points = rng.sample(range(-5, 6), per_group)
        disjuncts = [f"(= {var} {p})" if p >= 0 else f"(= {var} (- {-p}))" for p in sorted(points)]
        parts.append("(or " + " ".join(disjuncts) + ")")
    body = "(and " + " ".join(parts) + ")" if len(parts) > 1 else parts[0]
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def clausal_instance(seed: int, n_bool: int = 6, n_real: int = 3,
                     n_theory: int = 10, n_clauses: int = 26) -> str:
    """Random ternary-clause conjunction over mixed atoms.

    Conjunctive shape keeps the model count moderate, which makes these
    suitable as medium-size enumeration workloads.
    """
    rng = random.Random(seed)
    bools = [f"b{i}" for i in range(n_bool)]
    reals = [f"x{i}" for i in range(n_real)]
    gen = _Gen(rng, n_bool, n_real, None)
    theory = [gen._fresh_theory_atom() for _ in range(n_theory)]
    atoms = bools + theory
    clauses = []
    for _ in range(n_clauses):
        chosen = rng.sample(atoms, 3)
        lits = [a if rng.random() < 0.5 else f"(not {a})" for a in chosen]
        clauses.append("(or " + " ".join(lits) + ")")
    body = "(and " + " ".join(clauses) + ")"
    lines = ["(set-logic QF_LRA)"]
    for name in bools:
        lines.append(f"(declare-const {name} Bool)")
    used = sorted({n for atom in theory for n in _names_in(atom, reals)})
    for name in used:
        lines.append(f"(declare-const {name} Real)")
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def planning_style_instance(seed: int = 0, steps: int = 2) -> str:
    """A crafted scheduling-flavored instance with five symbol-disjoint
    theory groups: step ordering, resource levels, and three per-action
    parameter groups, steered by Boolean action switches."""
    rng = random.Random(seed)
    lines = ["(set-logic QF_LRA)"]
    bools = []
    constraints = []
    for i in range(steps + 1):
        lines.append(f"(declare-const t{i} Real)")
    for i in range(steps):
        lines.append(f"(declare-const r{i} Real)")
    for a in range(3):
        lines.append(f"(declare-const p{a} Real)")
    for i in range(steps):
        for a in range(3):
            b = f"act{a}_{i}"
            bools.append(b)
            lines.append(f"(declare-const {b} Bool)")
    # step ordering (time group)
    for i in range(steps):
        constraints.append(f"(< t{i} t{i + 1})")
    # resource levels (fluent group), deliberately over-constrained
    for i in range(steps - 1):
        constraints.append(f"(<= r{i} r{i + 1})")
    for i in range(steps):
        constraints.append(f"(or (= r{i} 0) (= r{i} 1))")
        sel = " ".join(f"act{a}_{i}" for a in range(3))
        constraints.append(f"(or {sel})")
        constraints.append(f"(=> act0_{i} (= r{i} 1))")
        constraints.append(f"(=> act1_{i} (= r{i} 0))")
    # per-action parameter windows (three independent groups)
    for a in range(3):
        lo = rng.randint(0, 2)
        for i in range(steps):
            constraints.append(f"(=> act{a}_{i} (<= {lo} p{a}))")
            constraints.append(f"(=> act{a}_{i} (< p{a} {lo + 1}))")
    body = "(and " + " ".join(constraints) + ")"
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
