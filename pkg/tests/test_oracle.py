import itertools
import random
from fractions import Fraction

import pytest

from helpers import L, atoms_problem, random_theory_literals, simplex_satisfiable
from tlemma.atoms import Literal
from tlemma.oracle import (
    BuiltinOracle,
    OracleConfig,
    OracleError,
    OracleTimeoutError,
    TLemma,
    is_valid_lemma,
    lemma_from_core,
    make_oracle,
    minimize_core,
)
from tlemma.problem import Problem


@pytest.fixture
def xy():
    # atom order: (x <= 0), (x = 1), (y <= 5)
    p = atoms_problem("(<= x 0)", "(= x 1)", "(<= y 5)")
    return p, BuiltinOracle(p.table, OracleConfig(model_production=True))


class TestCheck:
    def test_contradictory_equalities(self):
        p = atoms_problem("(= x 0)", "(= x 1)")
        oracle = BuiltinOracle(p.table)
        v = oracle.check([L(0), L(1)])
        assert not v.satisfiable
        assert set(v.core) == {L(0), L(1)}

    def test_satisfiable_pair(self, xy):
        p, oracle = xy
        v = oracle.check([L(0), L(1, False)])
        assert v.satisfiable
        assert v.model["x"] <= 0 and v.model["x"] != 1

    def test_empty_conjunction_is_sat(self, xy):
        _, oracle = xy
        assert oracle.check([]).satisfiable

    def test_core_minimized_drops_irrelevant(self, xy):
        p, oracle = xy
        v = oracle.check([L(0), L(1), L(2)])
        assert not v.satisfiable
        assert set(v.core) == {L(0), L(1)}

    def test_non_theory_literal_rejected(self):
        p = atoms_problem("(<= x 0)", bools=["b"])
        oracle = BuiltinOracle(p.table)
        with pytest.raises(OracleError):
            oracle.check([L(0)])  # index 0 is the Boolean atom b

    def test_strict_inequality_chain(self):
        p = atoms_problem("(< x 1)", "(< (- 0 x) 0)", "(= (* 2 x) 1)")
        oracle = BuiltinOracle(p.table, OracleConfig(model_production=True))
        v = oracle.check([L(0), L(1), L(2)])  # 0 < x < 1 and x = 1/2
        assert v.satisfiable
        assert v.model["x"] == Fraction(1, 2)

    def test_negated_equality_case_split(self):
        p = atoms_problem("(= x 0)", "(<= x 0)", "(<= (- 0 x) 0)")
        oracle = BuiltinOracle(p.table)
        # x != 0 and 0 <= x <= 0 is unsat
        v = oracle.check([L(0, False), L(1), L(2)])
        assert not v.satisfiable

    def test_timeout_is_an_error_not_a_verdict(self):
        p = atoms_problem("(<= (+ x y) 0)", "(<= (- x y) 1)")
        oracle = BuiltinOracle(p.table, OracleConfig(timeout_secs=1e-12))
        with pytest.raises(OracleTimeoutError):
            oracle.check([L(0), L(1)])


class TestSoundness:
    def test_against_independent_simplex_and_models(self):
        p = atoms_problem(
            "(<= (+ x y) 2)",
            "(< (- x y) 0)",
            "(= x 1)",
            "(<= y 0)",
            "(< (+ (* 2 x) y) 3)",
            "(= (+ x (* 3 y)) 0)",
        )
        oracle = BuiltinOracle(p.table, OracleConfig(model_production=True))
        rng = random.Random(5)
        n_sat = n_unsat = 0
        for _ in range(120):
            lits = random_theory_literals(rng, p.table)
            v = oracle.check(lits)
            assert v.satisfiable == simplex_satisfiable(lits, p.table)
            if v.satisfiable:
                n_sat += 1
                for lit in lits:
                    atom = p.table.linear_atom(lit.atom_index)
                    assert atom.evaluate(v.model) == lit.polarity
            else:
                n_unsat += 1
                assert not simplex_satisfiable(v.core, p.table)
        assert n_sat and n_unsat


class TestMinimizeCore:
    def test_already_minimal(self):
        p = atoms_problem("(= x 0)", "(= x 1)")
        oracle = BuiltinOracle(p.table)
        assert set(minimize_core([L(0), L(1)], oracle)) == {L(0), L(1)}

    def test_drops_redundant_member(self, xy):
        p, oracle = xy
        assert set(minimize_core([L(0), L(1), L(2)], oracle)) == {L(0), L(1)}

    def test_precondition_violation_is_an_error(self, xy):
        _, oracle = xy
        with pytest.raises(OracleError):
            minimize_core([L(2)], oracle)

    def test_minimality_on_random_unsat_conjunctions(self):
        p = atoms_problem(
            "(<= x 0)",
            "(= x 1)",
            "(< x (- 2))",
            "(<= (- 0 x) (- 1))",
            "(= (+ x y) 0)",
            "(<= y (- 3))",
            "(< (- 0 y) 2)",
            "(= y 4)",
        )
        oracle = BuiltinOracle(p.table)
        rng = random.Random(11)
        found = 0
        attempts = 0
        while found < 200 and attempts < 3000:
            attempts += 1
            lits = random_theory_literals(rng, p.table, max_len=8)
            if oracle.check(lits).satisfiable:
                continue
            found += 1
            core = minimize_core(lits, oracle)
            # subset-enumeration oracle: no proper subset may stay unsat
            for k in range(len(core)):
                subset = core[:k] + core[k + 1 :]
                assert oracle.is_satisfiable(subset)
        assert found == 200


class TestLemmas:
    def test_lemma_negates_core(self):
        core = (L(0), L(1))
        lemma = lemma_from_core(core)
        assert lemma.literals == (L(0, False), L(1, False))

    def test_lemma_sorted_by_atom_index(self):
        lemma = lemma_from_core((L(5), L(2, False)))
        assert lemma.literals == (L(2, True), L(5, False))

    def test_valid_lemma(self):
        p = atoms_problem("(= x 0)", "(= x 1)")
        oracle = BuiltinOracle(p.table)
        assert is_valid_lemma(TLemma.of([L(0, False), L(1, False)]), oracle)

    def test_propositional_tautology_is_valid(self):
        p = atoms_problem("(<= x 0)", "(= x 1)")
        oracle = BuiltinOracle(p.table)
        assert is_valid_lemma(TLemma.of([L(0, True), L(0, False)]), oracle)

    def test_invalid_clause_detected(self):
        p = atoms_problem("(= x 0)", "(= x 1)")
        oracle = BuiltinOracle(p.table)
        # (x=0) or (x=1) is falsified by x=2
        assert not is_valid_lemma(TLemma.of([L(0), L(1)]), oracle)


class TestConfig:
    def test_unminimized_core_is_full_set(self, xy):
        p, _ = xy
        oracle = BuiltinOracle(p.table, OracleConfig(minimize_cores=False))
        v = oracle.check([L(0), L(1), L(2)])
        assert set(v.core) == {L(0), L(1), L(2)}

    def test_make_oracle_builtin(self):
        p = atoms_problem("(= x 0)")
        assert isinstance(make_oracle(p.table), BuiltinOracle)

    def test_unknown_backend(self):
        p = atoms_problem("(= x 0)")
        with pytest.raises(ValueError):
            make_oracle(p.table, OracleConfig(backend="magic"))
