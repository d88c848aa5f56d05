"""Free algebras on finitely many generators, by bounded congruence closure.

Terms are generated one layer at a time: each round applies every operation
to every tuple of current classes that has no image yet. Between rounds all
equation instances over the previous round's classes are unioned and the
operation table is re-closed under congruence. If a round finds the table
total and no class left unchecked, the classes form a finite model generated
by the variables, which is the free algebra. Theories that are not locally
finite never reach that point and the bounds stop the construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebra import FiniteAlgebra, check_model
from .terms import App, Term, Theory, Var

DEFAULT_MAX_ELEMENTS = 64
DEFAULT_MAX_DEPTH = 8


@dataclass(frozen=True)
class FreeAlgebra:
    algebra: FiniteAlgebra
    generators: tuple      # element standing for each variable
    element_terms: tuple   # shallowest term found for each element
    trace: tuple           # class count after each round

    @property
    def size(self) -> int:
        return self.algebra.size


@dataclass(frozen=True)
class FreeBoundExceeded:
    classes_found: int
    depth_reached: int
    trace: tuple


class _Closure:
    def __init__(self, theory: Theory):
        self.theory = theory
        self.parent: list[int] = []
        self.terms: list[Term] = []
        self.table: dict[tuple, int] = {}

    def new(self, term: Term) -> int:
        self.parent.append(len(self.parent))
        self.terms.append(term)
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # the older id stays the root, so class terms stay shallow
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def rebuild(self):
        changed = True
        while changed:
            changed = False
            table: dict[tuple, int] = {}
            for (si, args), v in self.table.items():
                key = (si, tuple(self.find(a) for a in args))
                v = self.find(v)
                w = table.get(key)
                if w is None:
                    table[key] = v
                elif self.find(w) != v:
                    self.union(w, v)
                    changed = True
            self.table = table

    def roots(self) -> list[int]:
        return sorted({self.find(i) for i in range(len(self.parent))})

    def eval(self, t: Term, env) -> int | None:
        if isinstance(t, Var):
            return env[t.index]
        args = []
        for a in t.args:
            v = self.eval(a, env)
            if v is None:
                return None
            args.append(self.find(v))
        return self.table.get((self.theory.index_of(t.op.name), tuple(args)))

    def saturate(self, old: list[int]):
        """Union both sides of every equation instance over the ``old`` classes."""
        while True:
            changed = False
            roots = sorted({self.find(o) for o in old})
            for eq in self.theory.equations:
                for env in itertools.product(roots, repeat=eq.var_count):
                    lv = self.eval(eq.lhs, env)
                    if lv is None:
                        continue
                    rv = self.eval(eq.rhs, env)
                    if rv is not None and self.union(lv, rv):
                        changed = True
            if not changed:
                return
            self.rebuild()


def free_algebra(theory: Theory, n: int, max_elements: int = DEFAULT_MAX_ELEMENTS,
                 max_depth: int = DEFAULT_MAX_DEPTH) -> FreeAlgebra | FreeBoundExceeded:
    if n < 0:
        raise ValueError("number of generators must be non-negative")
    cc = _Closure(theory)
    for i in range(n):
        cc.new(Var(i))
    trace: list[int] = []
    depth = 0
    # classes that existed before the latest expansion; fresh classes are
    # instantiated one round later, which keeps saturation cheap
    old = cc.roots()
    while True:
        cc.saturate(old)
        roots = cc.roots()
        trace.append(len(roots))
        if len(roots) > max_elements:
            return FreeBoundExceeded(len(roots), depth, tuple(trace))
        checked = {cc.find(o) for o in old}
        fresh = [r for r in roots if r not in checked]
        old = roots
        missing = [
            (si, args)
            for si, sym in enumerate(theory.signature)
            for args in itertools.product(roots, repeat=sym.arity)
            if (si, args) not in cc.table
        ]
        if not missing and not fresh:
            return _finish(theory, cc, roots, n, tuple(trace))
        if not missing:
            continue
        if depth >= max_depth:
            return FreeBoundExceeded(len(roots), depth, tuple(trace))
        for si, args in missing:
            sym = theory.signature[si]
            cc.table[(si, args)] = cc.new(App(sym, tuple(cc.terms[a] for a in args)))
        depth += 1


def _finish(theory, cc: _Closure, roots, n, trace) -> FreeAlgebra:
    index = {r: i for i, r in enumerate(roots)}
    size = len(roots)
    tables = []
    for si, sym in enumerate(theory.signature):
        tables.append(tuple(
            index[cc.find(cc.table[(si, tuple(roots[a] for a in args))])]
            for args in itertools.product(range(size), repeat=sym.arity)
        ))
    A = FiniteAlgebra(theory, size, tuple(tables))
    if check_model(A):
        raise AssertionError("congruence closure reached a fixpoint that is not a model")
    return FreeAlgebra(
        A,
        tuple(index[cc.find(i)] for i in range(n)),
        tuple(cc.terms[r] for r in roots),
        trace,
    )
