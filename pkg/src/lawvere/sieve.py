"""Equational validity over all models up to a size bound.

Every verdict is labelled with its bound: an equation that survives at ``k``
holds in all models of size at most ``k`` and nothing more is claimed.
Counterexamples are searched in model enumeration order (by size, then key,
isomorphism-class representatives only), then environments in lexicographic
order, so the reported witness is reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import DEFAULT_MAX_NODES, FiniteAlgebra, _eval, enumerate_models
from .errors import MalformedTermError
from .terms import Equation, Term, Theory, is_well_formed, symbols


@dataclass(frozen=True)
class ValidUpTo:
    k: int


@dataclass(frozen=True)
class Refuted:
    model: FiniteAlgebra
    env: tuple
    lhs_value: int
    rhs_value: int


@dataclass(frozen=True)
class EquivalentUpTo:
    k: int


@dataclass(frozen=True)
class Distinguished:
    model: FiniteAlgebra
    env: tuple
    lhs_value: int
    rhs_value: int


def models_up_to(theory: Theory, k: int, jobs: int = 1,
                 max_nodes: int = DEFAULT_MAX_NODES) -> list[FiniteAlgebra]:
    """One model per isomorphism class, sizes ``1..k``, in enumeration order."""
    return list(enumerate_models(theory, k, up_to_iso=True, jobs=jobs, max_nodes=max_nodes))


def _check_terms(theory: Theory, *terms: Term):
    known = set(theory.signature)
    for t in terms:
        for s in symbols(t):
            if s not in known:
                raise MalformedTermError(f"{s.name} is not an operation of {theory.name}")


def _first_difference(models, t1: Term, t2: Term, n: int):
    for A in models:
        for env in itertools.product(range(A.size), repeat=n):
            lv, rv = _eval(A, t1, env), _eval(A, t2, env)
            if lv != rv:
                return A, env, lv, rv
    return None


def check_validity(theory: Theory, eq: Equation, k: int,
                   models: Sequence[FiniteAlgebra] | None = None) -> ValidUpTo | Refuted:
    _check_terms(theory, eq.lhs, eq.rhs)
    if models is None:
        models = models_up_to(theory, k)
    else:
        models = [A for A in models if A.size <= k]
    hit = _first_difference(models, eq.lhs, eq.rhs, eq.var_count)
    return ValidUpTo(k) if hit is None else Refuted(*hit)


@dataclass
class SieveReport:
    k: int
    surviving: list = field(default_factory=list)
    refuted: list = field(default_factory=list)      # (equation, Refuted) pairs
    duplicates: list = field(default_factory=list)   # (dropped, kept) pairs

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "surviving": [eq.name for eq in self.surviving],
            "refuted": [
                {"eq": eq.name, "model": r.model.digest, "size": r.model.size,
                 "env": list(r.env), "lhs": r.lhs_value, "rhs": r.rhs_value,
                 "model_record": r.model.to_record()}
                for eq, r in self.refuted
            ],
            "duplicates": [{"eq": a.name, "same_as": b.name} for a, b in self.duplicates],
        }


def sieve_candidates(theory: Theory, eqs: Sequence[Equation], k: int,
                     models: Sequence[FiniteAlgebra] | None = None) -> SieveReport:
    """Split candidates into those valid up to ``k`` and those refuted.

    Candidates equal up to renaming of variables are collapsed onto the
    first occurrence and listed under ``duplicates``.
    """
    if models is None:
        models = models_up_to(theory, k)
    report = SieveReport(k)
    seen: dict[tuple, Equation] = {}
    for eq in eqs:
        key = eq.structural_key()
        if key in seen:
            report.duplicates.append((eq, seen[key]))
            continue
        seen[key] = eq
        verdict = check_validity(theory, eq, k, models)
        if isinstance(verdict, ValidUpTo):
            report.surviving.append(eq)
        else:
            report.refuted.append((eq, verdict))
    return report


def syntactic_equivalence(theory: Theory, t1: Term, t2: Term, n: int, k: int,
                          models: Sequence[FiniteAlgebra] | None = None,
                          ) -> EquivalentUpTo | Distinguished:
    """Whether two ``n``-variable terms denote the same operation in every model up to ``k``."""
    if not (is_well_formed(t1, n) and is_well_formed(t2, n)):
        raise MalformedTermError(f"terms must be well-formed over {n} variables")
    _check_terms(theory, t1, t2)
    if models is None:
        models = models_up_to(theory, k)
    else:
        models = [A for A in models if A.size <= k]
    hit = _first_difference(models, t1, t2, n)
    return EquivalentUpTo(k) if hit is None else Distinguished(*hit)
