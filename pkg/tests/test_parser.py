from fractions import Fraction

import pytest

from tlemma.atoms import AtomKind
from tlemma.parser import ParseError, UnsupportedConstructError, parse_smtlib
from tlemma.terms import Relation, TermKind


def parse(text):
    return parse_smtlib(text)


class TestBasics:
    def test_disjunction_of_equalities(self):
        term, table = parse("(declare-const x Real)(assert (or (= x 0) (= x 1)))")
        assert term.kind is TermKind.OR
        assert len(table) == 2
        assert all(table.kind_of(i) is AtomKind.THEORY for i in (0, 1))

    def test_constant_assertion(self):
        term, table = parse("(assert true)")
        assert term.kind is TermKind.CONST and term.payload is True
        assert len(table) == 0

    def test_ge_normalized_to_le_with_flipped_sign(self):
        term, table = parse("(declare-const y Real)(assert (>= y 2))")
        atom = table.linear_atom(0)
        assert atom.relation is Relation.LE
        assert atom.coeff_map() == {"y": Fraction(-1)}
        assert atom.bound == Fraction(-2)

    def test_multiple_asserts_conjoin(self):
        term, table = parse(
            "(declare-const x Real)(assert (<= x 1))(assert (< x 0))"
        )
        assert term.kind is TermKind.AND
        assert len(term.args) == 2

    def test_equal_atoms_share_an_index(self):
        # one atom written three syntactically different ways
        term, table = parse(
            "(declare-const x Real)(declare-const y Real)"
            "(assert (or (<= (+ x y) 1) (>= 1 (+ y x)) (<= (* 2 y) (- 2 (* 2 x)))))"
        )
        assert len(table) == 1

    def test_set_logic_accepted(self):
        parse("(set-logic QF_LRA)(assert true)")

    def test_bool_atoms(self):
        term, table = parse("(declare-const p Bool)(declare-const q Bool)(assert (and p q))")
        assert table.kind_of(0) is AtomKind.BOOLEAN
        assert table.symbols_of(0) == frozenset()

    def test_declare_fun_zero_ary(self):
        term, table = parse("(declare-fun x () Real)(assert (< x 1))")
        assert len(table) == 1

    def test_let_binding(self):
        term, table = parse(
            "(declare-const x Real)(assert (let ((a (<= x 0)) (b 2)) (or a (< x b))))"
        )
        assert len(table) == 2

    def test_benign_commands_ignored(self):
        parse("(set-info :status sat)(set-option :produce-models true)"
              "(assert true)(check-sat)(get-model)(exit)")


class TestArithmetic:
    def test_rational_constants(self):
        term, table = parse("(declare-const x Real)(assert (<= x (/ 1 3)))")
        assert table.linear_atom(0).bound == Fraction(1, 3)

    def test_decimals(self):
        term, table = parse("(declare-const x Real)(assert (<= x 2.5))")
        assert table.linear_atom(0).bound == Fraction(5, 2)

    def test_negation_and_subtraction(self):
        term, table = parse(
            "(declare-const x Real)(declare-const y Real)(assert (<= (- x y 1) (- 2)))"
        )
        atom = table.linear_atom(0)
        assert atom.coeff_map() == {"x": Fraction(1), "y": Fraction(-1)}
        assert atom.bound == Fraction(-1)

    def test_trivial_atom_folds_to_constant(self):
        term, table = parse("(declare-const x Real)(assert (< x x))")
        assert term.kind is TermKind.CONST and term.payload is False
        assert len(table) == 0

    def test_distinct_rewrites_to_negated_equality(self):
        term, table = parse(
            "(declare-const x Real)(declare-const y Real)(assert (distinct x y))"
        )
        assert term.kind is TermKind.NOT
        assert table.linear_atom(0).relation is Relation.EQ

    def test_distinct_three_booleans_is_false(self):
        term, _ = parse(
            "(declare-const a Bool)(declare-const b Bool)(declare-const c Bool)"
            "(assert (distinct a b c))"
        )
        assert term.kind is TermKind.CONST and term.payload is False

    def test_chained_equality_over_reals(self):
        term, table = parse(
            "(declare-const x Real)(declare-const y Real)(declare-const z Real)"
            "(assert (= x y z))"
        )
        assert term.kind is TermKind.AND
        assert len(table) == 2

    def test_real_ite_lifted_by_case_split(self):
        term, table = parse(
            "(declare-const p Bool)(declare-const x Real)"
            "(assert (<= (ite p x (- x)) 1))"
        )
        assert term.kind is TermKind.ITE
        assert len(table) == 3  # p, x<=1, -x<=1

    def test_nested_real_ite(self):
        term, table = parse(
            "(declare-const p Bool)(declare-const q Bool)(declare-const x Real)"
            "(assert (< (+ (ite p x 0) (ite q 1 0)) 2))"
        )
        assert term.kind is TermKind.ITE
        # four leaf atoms: x+1<2, x<2, 1<2 (folds true), 0<2 (folds true)
        assert len(table) == 4


class TestErrors:
    def test_parse_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse("(assert\n  (or unknown_symbol))")
        assert err.value.line == 2
        assert err.value.col > 0

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            parse("(assert (or a b)")

    def test_unknown_logic_rejected(self):
        with pytest.raises(UnsupportedConstructError):
            parse("(set-logic QF_UFLRA)(assert true)")

    def test_quantifiers_rejected(self):
        with pytest.raises(UnsupportedConstructError):
            parse("(declare-const x Real)(assert (forall ((y Real)) (<= x y)))")

    def test_nonlinear_rejected(self):
        with pytest.raises(UnsupportedConstructError) as err:
            parse("(declare-const x Real)(declare-const y Real)(assert (<= (* x y) 1))")
        assert "nonlinear" in str(err.value)

    def test_unsupported_sort(self):
        with pytest.raises(UnsupportedConstructError):
            parse("(declare-const v Int)(assert true)")

    def test_uf_positive_arity_rejected(self):
        with pytest.raises(UnsupportedConstructError):
            parse("(declare-fun f (Real) Real)(assert true)")

    def test_division_by_zero(self):
        with pytest.raises(ParseError):
            parse("(declare-const x Real)(assert (<= (/ x 0) 1))")

    def test_sort_mismatch(self):
        with pytest.raises(ParseError):
            parse("(declare-const p Bool)(declare-const x Real)(assert (= p x))")

    def test_redeclaration_conflict(self):
        with pytest.raises(ParseError):
            parse("(declare-const x Real)(declare-const x Bool)(assert true)")
