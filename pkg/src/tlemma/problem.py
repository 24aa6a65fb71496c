"""Bundle of everything derived from one parsed instance."""

from __future__ import annotations

from dataclasses import dataclass

from .atoms import AtomTable, boolean_abstraction
from .cnf import CnfProblem, to_cnf
from .parser import parse_smtlib
from .terms import Term


@dataclass
class Problem:
    term: Term
    table: AtomTable
    abstract: Term
    cnf: CnfProblem

    @classmethod
    def from_term(cls, term: Term, table: AtomTable) -> "Problem":
        abstract = boolean_abstraction(term, table)
        return cls(term, table, abstract, to_cnf(abstract, table))

    @classmethod
    def from_text(cls, text: str) -> "Problem":
        term, table = parse_smtlib(text)
        return cls.from_term(term, table)

    @classmethod
    def from_file(cls, path) -> "Problem":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())
