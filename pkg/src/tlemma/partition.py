"""Partition the atom set into symbol-disjoint components via union-find.

Two theory atoms land in the same component iff they are connected in the
graph whose edges join atoms sharing at least one variable.  Boolean atoms
never induce edges and are grouped into one designated component; they are
handled by projection during enumeration, so no theory conflict can involve
them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

from .atoms import AtomKind


class UnionFind:
    """Union-find with path compression and union by rank."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


@dataclass(frozen=True)
class Partition:
    components: Tuple[FrozenSet[int], ...]
    boolean_component: Optional[int]

    def theory_components(self) -> List[FrozenSet[int]]:
        return [
            c for i, c in enumerate(self.components) if i != self.boolean_component
        ]


def partition_atoms(table) -> Partition:
    """Symbol-disjoint components of the atom set, ordered by smallest member.

    A pure function of the table; safe to call from any worker.
    """
    n = len(table)
    uf = UnionFind(n)
    first_with_symbol: Dict[str, int] = {}
    theory = []
    booleans = []
    for i in range(n):
        if table.kind_of(i) is AtomKind.THEORY:
            theory.append(i)
            for name in table.linear_atom(i).variables:
                holder = first_with_symbol.setdefault(name, i)
                if holder != i:
                    uf.union(holder, i)
        else:
            booleans.append(i)
    groups: Dict[int, List[int]] = {}
    for i in theory:
        groups.setdefault(uf.find(i), []).append(i)
    components = [frozenset(g) for g in groups.values()]
    if booleans:
        components.append(frozenset(booleans))
    components.sort(key=min)
    boolean_component = None
    if booleans:
        boolean_component = components.index(frozenset(booleans))
    return Partition(tuple(components), boolean_component)
