"""Homomorphisms, automorphism groups and natural families of operations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .algebra import FiniteAlgebra, _flat_index
from .errors import MissingAlgebraError, SizeMismatchError
from .terms import OperationSymbol


@dataclass(frozen=True)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: tuple

    def __call__(self, x: int) -> int:
        return self.map[x]

    def then(self, other: "Homomorphism") -> "Homomorphism":
        """``other`` after ``self``."""
        if other.source != self.target:
            raise SizeMismatchError("homomorphisms are not composable")
        return Homomorphism(self.source, other.target, tuple(other.map[y] for y in self.map))

    def is_bijective(self) -> bool:
        return self.source.size == self.target.size and len(set(self.map)) == len(self.map)

    def inverse(self) -> "Homomorphism":
        inv = [0] * len(self.map)
        for x, y in enumerate(self.map):
            inv[y] = x
        return Homomorphism(self.target, self.source, tuple(inv))

    def to_record(self) -> dict:
        return {"source": self.source.digest, "target": self.target.digest, "map": list(self.map)}


@dataclass(frozen=True)
class FailedSquare:
    symbol: OperationSymbol
    args: tuple


def _check_sizes(map: Sequence[int], A: FiniteAlgebra, B: FiniteAlgebra):
    if len(map) != A.size:
        raise SizeMismatchError(f"map has {len(map)} entries for a carrier of size {A.size}")
    if any(not 0 <= y < B.size for y in map):
        raise SizeMismatchError(f"map leaves the target carrier of size {B.size}")
    if A.theory != B.theory:
        raise SizeMismatchError("algebras belong to different theories")


def failed_square(map: Sequence[int], A: FiniteAlgebra, B: FiniteAlgebra) -> FailedSquare | None:
    """First operation square that does not commute, by symbol then argument tuple."""
    _check_sizes(map, A, B)
    for sym, ta, tb in zip(A.theory.signature, A.tables, B.tables):
        for idx, args in enumerate(itertools.product(range(A.size), repeat=sym.arity)):
            if map[ta[idx]] != tb[_flat_index([map[a] for a in args], B.size)]:
                return FailedSquare(sym, args)
    return None


def is_homomorphism(map: Sequence[int], A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return failed_square(map, A, B) is None


def enumerate_homs(A: FiniteAlgebra, B: FiniteAlgebra, isos_only: bool = False,
                   ) -> list[Homomorphism]:
    """All homomorphisms ``A -> B`` in lexicographic order of their maps.

    Images of constants are pinned first; after each further choice the
    partial map is closed under the operations, which either forces more
    images or exposes a conflict.
    """
    if A.theory != B.theory:
        raise SizeMismatchError("algebras belong to different theories")
    if isos_only and A.size != B.size:
        return []
    sa, sb = A.size, B.size
    ops = [
        (list(itertools.product(range(sa), repeat=sym.arity)), ta, tb)
        for sym, ta, tb in zip(A.theory.signature, A.tables, B.tables)
    ]

    def close(h: list[int]) -> bool:
        changed = True
        while changed:
            changed = False
            for tuples, ta, tb in ops:
                for idx, args in enumerate(tuples):
                    img = 0
                    for a in args:
                        if h[a] < 0:
                            break
                        img = img * sb + h[a]
                    else:
                        out, want = ta[idx], tb[img]
                        if h[out] < 0:
                            h[out] = want
                            changed = True
                        elif h[out] != want:
                            return False
        return True

    found: list[tuple] = []
    start = [-1] * sa
    if not close(start):
        return []

    def rec(h: list[int]):
        try:
            i = h.index(-1)
        except ValueError:
            found.append(tuple(h))
            return
        for b in range(sb):
            h2 = h.copy()
            h2[i] = b
            if close(h2):
                rec(h2)

    rec(start)
    found.sort()
    homs = [Homomorphism(A, B, m) for m in found]
    if isos_only:
        homs = [f for f in homs if f.is_bijective()]
    return homs


def automorphism_group(A: FiniteAlgebra) -> list[Homomorphism]:
    """Bijective endomorphisms of ``A``; the group laws are re-checked before returning."""
    auts = enumerate_homs(A, A, isos_only=True)
    maps = {f.map for f in auts}
    if tuple(range(A.size)) not in maps:
        raise AssertionError("automorphisms lack the identity")
    for f in auts:
        if f.inverse().map not in maps:
            raise AssertionError("automorphisms not closed under inverse")
        for g in auts:
            if f.then(g).map not in maps:
                raise AssertionError("automorphisms not closed under composition")
    return auts


def all_homs(algebras: Sequence[FiniteAlgebra]) -> list[Homomorphism]:
    """Every homomorphism between every ordered pair, sources outermost."""
    return [f for A in algebras for B in algebras for f in enumerate_homs(A, B)]


@dataclass(frozen=True)
class NaturalFamily:
    """One map ``A^arity -> A^coarity`` per algebra, stored as tables.

    ``components[i][j]`` is the image (a ``coarity``-tuple) of the ``j``-th
    ``arity``-tuple of ``algebras[i]`` in row-major order.
    """

    arity: int
    coarity: int
    algebras: tuple
    components: tuple

    def index_of(self, A: FiniteAlgebra) -> int:
        for i, B in enumerate(self.algebras):
            if B == A:
                return i
        raise MissingAlgebraError(f"family is not defined on an algebra of size {A.size}")

    def __call__(self, A: FiniteAlgebra, args: Sequence[int]) -> tuple:
        return self.components[self.index_of(A)][_flat_index(args, A.size)]

    def values(self) -> tuple:
        """All images, flattened over algebras; equal families give equal values."""
        return tuple(y for comp in self.components for y in comp)


@dataclass(frozen=True)
class NaturalityFailure:
    hom: Homomorphism
    args: tuple


def check_naturality(alpha: NaturalFamily, homs: Iterable[Homomorphism],
                     ) -> NaturalityFailure | None:
    """First hom ``f: A -> B`` and tuple ``x`` with ``f(alpha_A(x)) != alpha_B(f(x))``."""
    position = {A: i for i, A in enumerate(alpha.algebras)}

    def lookup(A):
        i = position.get(A)
        if i is None:
            raise MissingAlgebraError(
                f"family is not defined on an algebra of size {A.size} used by a homomorphism"
            )
        return alpha.components[i]

    for f in homs:
        comp_a, comp_b = lookup(f.source), lookup(f.target)
        m = f.map
        images = _tuple_images(m, f.target.size, alpha.arity)
        for idx, ys in enumerate(comp_a):
            if tuple(m[y] for y in ys) != comp_b[images[idx]]:
                return NaturalityFailure(f, _tuples(f.source.size, alpha.arity)[idx])
    return None


@lru_cache(maxsize=None)
def _tuples(size: int, n: int) -> tuple:
    return tuple(itertools.product(range(size), repeat=n))


@lru_cache(maxsize=4096)
def _tuple_images(map: tuple, target_size: int, n: int) -> tuple:
    """Flat index in the target of the image of each source ``n``-tuple."""
    return tuple(_flat_index([map[a] for a in xs], target_size) for xs in _tuples(len(map), n))
