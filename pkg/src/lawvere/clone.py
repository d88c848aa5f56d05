"""Operations recovered from homomorphisms.

Over a finite collection of models (one per isomorphism class, sizes up to
``k``) and all homomorphisms between them, a natural family ``U^n => U^m``
is a choice of map ``A^n -> A^m`` for every model that commutes with every
homomorphism. Every term tuple induces one; :func:`reconstruct_theory`
compares the two sets cell by cell. Agreement is only ever claimed at the
stated bounds: over a truncated category there may be natural families no
term induces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import DEFAULT_MAX_NODES, FiniteAlgebra, _eval, _flat_index, check_model
from .dsl import default_var_names, format_term
from .errors import (BoundExceeded, IncompleteMorphismError, InvalidMorphismError, LawvereError,
                     MalformedTermError)
from .free import DEFAULT_MAX_DEPTH, DEFAULT_MAX_ELEMENTS, FreeAlgebra, free_algebra
from .homs import NaturalFamily, _tuples, all_homs, check_naturality
from .sieve import Refuted, check_validity, models_up_to
from .terms import (App, Equation, Term, Theory, TheoryMorphism, Var, is_well_formed,
                    translate_equation)

EQUAL = "EQUAL"
EXTRA_NATURAL = "EXTRA_NATURAL"
BOUND_EXCEEDED = "BOUND_EXCEEDED"

DEFAULT_MAX_TERMS = 200_000


def induced_family(terms: Term | Sequence[Term], arity: int,
                   algebras: Sequence[FiniteAlgebra]) -> NaturalFamily:
    """The family ``A -> (x -> (t_1(x), ..., t_m(x)))`` of a term or term tuple."""
    if isinstance(terms, (Var, App)):
        terms = (terms,)
    terms = tuple(terms)
    for t in terms:
        if not is_well_formed(t, arity):
            raise MalformedTermError(f"term uses variables beyond the {arity} given")
    components = []
    for A in algebras:
        components.append(tuple(
            tuple(_eval(A, t, x) for t in terms) for x in _tuples(A.size, arity)
        ))
    return NaturalFamily(arity, len(terms), tuple(algebras), tuple(components))


# --------------------------------------------------------------------------
# Natural families by constraint propagation


def _csp_families(n: int, m: int, algebras, homs, max_nodes: int) -> list[NaturalFamily]:
    """Solve for all natural families directly.

    One variable per (model, n-tuple), valued in the m-tuples of that model.
    Fixing ``alpha_A(x)`` fixes ``alpha_B(f(x))`` for every ``f: A -> B``, so
    each choice is pushed along all outgoing homomorphisms before branching.
    """
    sizes = [A.size for A in algebras]
    position = {A: i for i, A in enumerate(algebras)}
    base = []
    total = 0
    for s in sizes:
        base.append(total)
        total += s ** n
    domain = [0] * total
    for i, s in enumerate(sizes):
        for j in range(s ** n):
            domain[base[i] + j] = s ** m
    edges: list[list[tuple[int, tuple]]] = [[] for _ in range(total)]
    for f in homs:
        i, j = position[f.source], position[f.target]
        sa, sb = sizes[i], sizes[j]
        push = tuple(
            _flat_index([f.map[y] for y in ys], sb)
            for ys in itertools.product(range(sa), repeat=m)
        )
        for idx, xs in enumerate(itertools.product(range(sa), repeat=n)):
            edges[base[i] + idx].append((base[j] + _flat_index([f.map[x] for x in xs], sb), push))

    value = [-1] * total
    trail: list[int] = []
    solutions: list[tuple] = []
    nodes = 0

    def assign(v: int, code: int) -> bool:
        if value[v] >= 0:
            return value[v] == code
        value[v] = code
        trail.append(v)
        stack = [v]
        while stack:
            u = stack.pop()
            cu = value[u]
            for w, push in edges[u]:
                want = push[cu]
                if value[w] < 0:
                    value[w] = want
                    trail.append(w)
                    stack.append(w)
                elif value[w] != want:
                    return False
        return True

    def undo(mark: int):
        while len(trail) > mark:
            value[trail.pop()] = -1

    def rec(start: int):
        nonlocal nodes
        v = start
        while v < total and value[v] >= 0:
            v += 1
        if v == total:
            solutions.append(tuple(value))
            return
        for code in range(domain[v]):
            nodes += 1
            if nodes > max_nodes:
                raise BoundExceeded(
                    f"natural family search exceeded {max_nodes} nodes",
                    nodes=nodes, families_found=len(solutions),
                )
            mark = len(trail)
            if assign(v, code):
                rec(v + 1)
            undo(mark)

    rec(0)

    families = []
    for sol in solutions:
        components = []
        for i, s in enumerate(sizes):
            comp = []
            for j in range(s ** n):
                code = sol[base[i] + j]
                ys = []
                for _ in range(m):
                    code, r = divmod(code, s)
                    ys.append(r)
                comp.append(tuple(reversed(ys)))
            components.append(tuple(comp))
        families.append(NaturalFamily(n, m, tuple(algebras), tuple(components)))
    families.sort(key=lambda a: a.components)
    return families


def _yoneda_families(free: FreeAlgebra, n: int, m: int, algebras, homs) -> list[NaturalFamily]:
    """Families induced by m-tuples of elements of the free algebra on n generators."""
    families = []
    for combo in itertools.product(free.element_terms, repeat=m):
        alpha = induced_family(combo, n, algebras)
        failure = check_naturality(alpha, homs)
        if failure is not None:
            raise LawvereError(f"term-induced family failed naturality at {failure}")
        families.append(alpha)
    families.sort(key=lambda a: a.components)
    return families


def natural_families(theory: Theory, n: int, m: int, k: int, *,
                     models: Sequence[FiniteAlgebra] | None = None, homs=None,
                     method: str = "auto", max_nodes: int = DEFAULT_MAX_NODES,
                     max_elements: int = DEFAULT_MAX_ELEMENTS,
                     max_depth: int = DEFAULT_MAX_DEPTH, jobs: int = 1,
                     ) -> list[NaturalFamily]:
    """All natural families ``U^n => U^m`` over the models of size at most ``k``.

    ``method="auto"`` uses the free algebra on ``n`` generators when it is
    finite and small enough to be among the models (its element tuples are
    then exactly the natural families); otherwise it solves the constraint
    problem. ``"csp"`` and ``"yoneda"`` force one route.
    """
    if models is None:
        models = models_up_to(theory, k, jobs=jobs)
    models = list(models)
    if homs is None:
        homs = all_homs(models)
    if method not in ("auto", "csp", "yoneda"):
        raise ValueError(f"unknown method {method!r}")
    if method != "csp":
        free = free_algebra(theory, n, max_elements, max_depth)
        if isinstance(free, FreeAlgebra) and 1 <= free.size <= k:
            return _yoneda_families(free, n, m, models, homs)
        if method == "yoneda":
            raise BoundExceeded(
                f"free algebra on {n} generators is not available at k={k}",
                free=type(free).__name__,
            )
    return _csp_families(n, m, models, homs, max_nodes)


# --------------------------------------------------------------------------
# Term clone


@dataclass
class TermClone:
    """Depth-bounded terms over ``n`` variables, one per distinct operation."""

    n: int
    terms: list          # representative term per operation, shallowest first
    values: list         # value vector of each representative over all models
    merged: int = 0      # generated terms dropped as equal to an earlier one


class _Points:
    """All n-tuples of all models laid end to end, for vectorised evaluation."""

    def __init__(self, theory: Theory, n: int, algebras: Sequence[FiniteAlgebra]):
        self.theory = theory
        sizes, coords = [], [[] for _ in range(n)]
        for A in algebras:
            for xs in itertools.product(range(A.size), repeat=n):
                sizes.append(A.size)
                for i, x in enumerate(xs):
                    coords[i].append(x)
        self.length = len(sizes)
        self.size = np.array(sizes, dtype=np.int64)
        self.coords = [np.array(c, dtype=np.int64) for c in coords]
        # per symbol: flat tables of all models concatenated, and each point's offset into it
        self.tables, self.offsets = [], []
        for si in range(len(theory.signature)):
            flat, offs, pos = [], [], 0
            for A in algebras:
                flat.extend(A.tables[si])
                offs.extend([pos] * (A.size ** n))
                pos += len(A.tables[si])
            self.tables.append(np.array(flat, dtype=np.int64))
            self.offsets.append(np.array(offs, dtype=np.int64))

    def var(self, i: int) -> np.ndarray:
        return self.coords[i]

    def apply(self, si: int, args: Sequence[np.ndarray]) -> np.ndarray:
        idx = np.zeros(self.length, dtype=np.int64)
        for a in args:
            idx = idx * self.size + a
        return self.tables[si][self.offsets[si] + idx]


def term_clone(theory: Theory, n: int, depth: int, algebras: Sequence[FiniteAlgebra],
               max_terms: int = DEFAULT_MAX_TERMS) -> TermClone:
    """Terms of depth at most ``depth``, deduplicated by their values on ``algebras``.

    Terms are built layer by layer from the representatives found so far, so
    only one term per distinct operation is ever extended.
    """
    pts = _Points(theory, n, algebras)
    seen: dict[bytes, int] = {}
    clone = TermClone(n, [], [])

    def offer(term: Term, vec: np.ndarray) -> bool:
        key = vec.tobytes()
        if key in seen:
            clone.merged += 1
            return False
        seen[key] = len(clone.terms)
        clone.terms.append(term)
        clone.values.append(vec)
        return True

    for i in range(n):
        offer(Var(i), pts.var(i))
    for si, sym in enumerate(theory.signature):
        if sym.arity == 0:
            offer(App(sym, ()), pts.apply(si, ()))

    generated = len(clone.terms) + clone.merged
    frontier_start = 0
    for _ in range(depth):
        old_count = len(clone.terms)
        reps = list(range(old_count))
        for si, sym in enumerate(theory.signature):
            if sym.arity == 0:
                continue
            for args in itertools.product(reps, repeat=sym.arity):
                if all(a < frontier_start for a in args):
                    continue  # built in an earlier layer already
                generated += 1
                if generated > max_terms:
                    raise BoundExceeded(
                        f"term clone exceeded {max_terms} generated terms",
                        generated=generated, operations=len(clone.terms),
                    )
                offer(App(sym, tuple(clone.terms[a] for a in args)),
                      pts.apply(si, [clone.values[a] for a in args]))
        frontier_start = old_count
        if len(clone.terms) == old_count:
            break
    return clone


def _family_key(alpha: NaturalFamily) -> tuple:
    """Per-coordinate value vectors, comparable with term-tuple keys."""
    return tuple(
        tuple(ys[j] for comp in alpha.components for ys in comp) for j in range(alpha.coarity)
    )


# --------------------------------------------------------------------------
# Reconstruction report


@dataclass
class ReconstructionCell:
    n: int
    m: int
    term_ops: list = field(default_factory=list)    # tuples of m terms
    natural_count: int | None = None
    verdict: str = BOUND_EXCEEDED
    witnesses: list = field(default_factory=list)   # natural families no term induces
    resolved: bool = False     # term deduplication confirmed by the free algebra
    merged_terms: int = 0
    method: str = ""
    note: str = ""

    @property
    def clone_size(self) -> int:
        return len(self.term_ops)


@dataclass
class ReconstructionReport:
    theory: Theory
    k: int
    depth: int
    cells: list
    bounds: dict

    def cell(self, n: int, m: int) -> ReconstructionCell:
        for c in self.cells:
            if (c.n, c.m) == (n, m):
                return c
        raise KeyError((n, m))

    @property
    def verdicts(self) -> set:
        return {c.verdict for c in self.cells}

    def to_json(self) -> dict:
        avoid = [s.name for s in self.theory.signature]
        cells = []
        for c in self.cells:
            names = default_var_names(c.n, avoid)

            def render(ts):
                if len(ts) == 1:
                    return format_term(ts[0], names)
                return "(" + ",".join(format_term(t, names) for t in ts) + ")"

            cells.append({
                "n": c.n,
                "m": c.m,
                "term_ops": [render(ts) for ts in c.term_ops],
                "natural_count": c.natural_count,
                "verdict": c.verdict,
                "witnesses": [
                    {"components": [[list(ys) for ys in comp] for comp in w.components]}
                    for w in c.witnesses
                ],
                "resolved": c.resolved,
                "merged_terms": c.merged_terms,
                "method": c.method,
                "note": c.note,
            })
        return {
            "theory": self.theory.name,
            "k": self.k,
            "depth": self.depth,
            "bounds": self.bounds,
            "cells": cells,
        }


def reconstruct_theory(theory: Theory, n_max: int, m_max: int, k: int, depth: int, *,
                       max_nodes: int = DEFAULT_MAX_NODES,
                       max_elements: int = DEFAULT_MAX_ELEMENTS,
                       max_terms: int = DEFAULT_MAX_TERMS, jobs: int = 1,
                       models: Sequence[FiniteAlgebra] | None = None,
                       ) -> ReconstructionReport:
    """Compare term operations with natural families for ``0 <= n <= n_max``, ``1 <= m <= m_max``.

    A cell is EQUAL when every natural family over the models of size at
    most ``k`` is induced by a tuple of terms of depth at most ``depth``,
    EXTRA_NATURAL (with the leftover families as witnesses) when not, and
    BOUND_EXCEEDED when a search gave up. Bound failures stay in their cell.
    """
    if k < 1 or depth < 0 or n_max < 0 or m_max < 1:
        raise ValueError("k and m_max must be positive, n_max and depth non-negative")
    bounds = {"max_nodes": max_nodes, "max_elements": max_elements, "max_terms": max_terms,
              "max_depth": depth}
    if models is None:
        models = models_up_to(theory, k, jobs=jobs, max_nodes=max_nodes)
    models = [A for A in models if A.size <= k]
    homs = all_homs(models)
    cells = []
    for n in range(n_max + 1):
        free = free_algebra(theory, n, max_elements, max(depth, DEFAULT_MAX_DEPTH))
        yoneda = isinstance(free, FreeAlgebra) and 1 <= free.size <= k
        resolved = isinstance(free, FreeAlgebra) and free.size <= k
        try:
            clone = term_clone(theory, n, depth, models, max_terms)
        except BoundExceeded as exc:
            for m in range(1, m_max + 1):
                cells.append(ReconstructionCell(n, m, note=str(exc)))
            continue
        for m in range(1, m_max + 1):
            cell = ReconstructionCell(n, m, resolved=resolved, merged_terms=clone.merged,
                                      method="yoneda" if yoneda else "csp")
            cell.term_ops = list(itertools.product(clone.terms, repeat=m))
            try:
                fams = natural_families(theory, n, m, k, models=models, homs=homs,
                                        method=cell.method, max_nodes=max_nodes,
                                        max_elements=max_elements)
            except BoundExceeded as exc:
                cell.verdict = BOUND_EXCEEDED
                cell.note = str(exc)
                cells.append(cell)
                continue
            term_keys = {
                tuple(tuple(int(v) for v in clone.values[i]) for i in combo)
                for combo in itertools.product(range(len(clone.terms)), repeat=m)
            }
            fam_keys = {_family_key(a): a for a in fams}
            if not term_keys <= fam_keys.keys():
                raise LawvereError(f"a term-induced family at n={n}, m={m} is not natural")
            cell.natural_count = len(fams)
            cell.witnesses = [a for key, a in fam_keys.items() if key not in term_keys]
            cell.witnesses.sort(key=lambda a: a.components)
            cell.verdict = EQUAL if not cell.witnesses else EXTRA_NATURAL
            if not resolved and clone.merged:
                cell.note = (f"{clone.merged} term(s) merged by agreement on models of size <= {k}"
                             " only (UNRESOLVED)")
            cells.append(cell)
    return ReconstructionReport(theory, k, depth, cells, bounds)


# --------------------------------------------------------------------------
# Theory morphisms


@dataclass(frozen=True)
class Counterexample:
    equation: Equation      # the source axiom
    translated: Equation    # its image in the target theory
    model: FiniteAlgebra    # a target model refuting the image
    env: tuple
    lhs_value: int
    rhs_value: int


def validate_theory_morphism(F: TheoryMorphism, k: int,
                             models: Sequence[FiniteAlgebra] | None = None,
                             ) -> Counterexample | None:
    """First source axiom whose translation fails in a target model of size at most ``k``."""
    _require_total(F)
    if models is None:
        models = models_up_to(F.target, k)
    for eq in F.source.equations:
        image = translate_equation(F, eq)
        verdict = check_validity(F.target, image, k, models)
        if isinstance(verdict, Refuted):
            return Counterexample(eq, image, verdict.model, verdict.env,
                                  verdict.lhs_value, verdict.rhs_value)
    return None


def _require_total(F: TheoryMorphism):
    missing = [s.name for s in F.source.signature if s.name not in F.assignment]
    if missing:
        raise IncompleteMorphismError(f"morphism does not assign {', '.join(missing)}")


def restrict_along(F: TheoryMorphism, B: FiniteAlgebra, k: int | None = None) -> FiniteAlgebra:
    """Reinterpret a target model as a source model through ``F``.

    Each source symbol's table is its assigned term evaluated in ``B``.
    With ``k`` the morphism is first validated on all target models up to
    ``k``; either way the result is refused if ``B`` breaks a translated axiom.
    """
    _require_total(F)
    if B.theory != F.target:
        raise LawvereError(f"model belongs to {B.theory.name}, not {F.target.name}")
    if k is not None:
        ce = validate_theory_morphism(F, k)
        if ce is not None:
            raise InvalidMorphismError(
                f"{F.name or 'morphism'} does not preserve {ce.equation.name}", ce)
    tables = []
    for sym in F.source.signature:
        image = F.assignment[sym.name]
        tables.append(tuple(
            _eval(B, image, xs) for xs in itertools.product(range(B.size), repeat=sym.arity)
        ))
    A = FiniteAlgebra(F.source, B.size, tuple(tables))
    violations = check_model(A)
    if violations:
        v = violations[0]
        image = translate_equation(F, v.equation)
        raise InvalidMorphismError(
            f"{F.name or 'morphism'} does not preserve {v.equation.name} in this model",
            Counterexample(v.equation, image, B, v.env, v.lhs_value, v.rhs_value),
        )
    return A
