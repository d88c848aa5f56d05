"""Finite algebras of a theory: evaluation, model checking, enumeration.

An algebra stores one flat row-major table per signature symbol. Algebras of
one size are ordered by their *key*: the concatenation of all tables with
lower-arity symbols first (ties broken by signature order). Enumeration
emits models by size, then by key, and the canonical form of an algebra is
the relabeling with the smallest key.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

from .dsl import render_theory
from .errors import BoundExceeded, EvaluationError, TableShapeError
from .terms import Equation, Term, Theory, Var

DEFAULT_MAX_NODES = 20_000_000


def cell_order(theory: Theory) -> list[int]:
    """Signature indices in key order: by arity, then declaration order."""
    return sorted(range(len(theory.signature)), key=lambda i: (theory.signature[i].arity, i))


@lru_cache(maxsize=64)
def theory_hash(theory: Theory) -> str:
    return hashlib.sha256(render_theory(theory).encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    theory: Theory
    size: int
    tables: tuple

    def __post_init__(self):
        tables = tuple(tuple(int(v) for v in t) for t in self.tables)
        object.__setattr__(self, "tables", tables)
        sig = self.theory.signature
        if len(tables) != len(sig):
            raise TableShapeError(
                f"{len(tables)} tables for a signature of {len(sig)} symbols"
            )
        if self.size < 0:
            raise TableShapeError("negative carrier size")
        for sym, table in zip(sig, tables):
            expected = self.size ** sym.arity
            if len(table) != expected:
                raise TableShapeError(
                    f"table for {sym.name} has {len(table)} entries, expected {expected}"
                )
            if any(not 0 <= v < self.size for v in table):
                raise TableShapeError(f"table for {sym.name} leaves the carrier")

    # the hash skips the theory: algebras are almost always compared within one
    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return (self.size == other.size and self.tables == other.tables
                and self.theory == other.theory)

    def __hash__(self):
        return hash((self.size, self.tables))

    def __getstate__(self):
        return {"theory": self.theory, "size": self.size, "tables": self.tables}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)

    @cached_property
    def key(self) -> tuple:
        return tuple(v for i in cell_order(self.theory) for v in self.tables[i])

    def sort_key(self) -> tuple:
        return (self.size, self.key)

    def table(self, name: str) -> tuple:
        return self.tables[self.theory.index_of(name)]

    def apply(self, name: str, *args: int) -> int:
        return self.tables[self.theory.index_of(name)][_flat_index(args, self.size)]

    def constant(self, name: str) -> int:
        return self.table(name)[0]

    @classmethod
    def from_key(cls, theory: Theory, size: int, key: Sequence[int]) -> "FiniteAlgebra":
        tables: list = [None] * len(theory.signature)
        pos = 0
        for i in cell_order(theory):
            n = size ** theory.signature[i].arity
            tables[i] = tuple(key[pos:pos + n])
            pos += n
        return cls(theory, size, tuple(tables))

    @classmethod
    def from_functions(cls, theory: Theory, size: int, **ops) -> "FiniteAlgebra":
        """Build tables from Python callables or constants, keyed by symbol name."""
        tables = []
        for sym in theory.signature:
            f = ops[sym.name]
            if sym.arity == 0:
                tables.append((f() if callable(f) else f,))
            else:
                tables.append(tuple(
                    f(*t) for t in itertools.product(range(size), repeat=sym.arity)
                ))
        return cls(theory, size, tuple(tables))

    # JSON records ---------------------------------------------------------

    def to_record(self) -> dict:
        return {
            "theory": self.theory.name,
            "theory_hash": theory_hash(self.theory),
            "size": self.size,
            "tables": {
                sym.name: (t[0] if sym.arity == 0 else list(t))
                for sym, t in zip(self.theory.signature, self.tables)
            },
        }

    @classmethod
    def from_record(cls, record: dict, theory: Theory) -> "FiniteAlgebra":
        if record.get("theory_hash") not in (None, theory_hash(theory)):
            raise TableShapeError(
                f"record was produced for a different theory ({record.get('theory')})"
            )
        try:
            size = int(record["size"])
            raw = record["tables"]
            tables = []
            for sym in theory.signature:
                t = raw[sym.name]
                tables.append((t,) if sym.arity == 0 and isinstance(t, int) else tuple(t))
        except (KeyError, TypeError, ValueError) as exc:
            raise TableShapeError(f"malformed algebra record: {exc}") from None
        return cls(theory, size, tuple(tables))

    @cached_property
    def digest(self) -> str:
        blob = json.dumps(self.to_record(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _flat_index(args: Sequence[int], size: int) -> int:
    idx = 0
    for a in args:
        idx = idx * size + a
    return idx


@dataclass(frozen=True)
class Violation:
    equation: Equation
    env: tuple
    lhs_value: int
    rhs_value: int


def evaluate(A: FiniteAlgebra, t: Term, env: Sequence[int]) -> int:
    for v in env:
        if not 0 <= v < A.size:
            raise EvaluationError(f"element {v} is outside a carrier of size {A.size}")
    try:
        return _eval(A, t, env)
    except IndexError:
        raise EvaluationError(f"term uses a variable beyond the {len(env)} supplied") from None
    except KeyError as exc:
        raise EvaluationError(f"symbol {exc.args[0]} is not in {A.theory.name}") from None


def _eval(A: FiniteAlgebra, t: Term, env: Sequence[int]) -> int:
    if isinstance(t, Var):
        return env[t.index]
    idx = 0
    for a in t.args:
        idx = idx * A.size + _eval(A, a, env)
    return A.tables[A.theory.index_of(t.op.name)][idx]


def check_model(A: FiniteAlgebra) -> list[Violation]:
    """Every failing equation instance, by equation then environment; empty means a model."""
    out = []
    for eq in A.theory.equations:
        for env in itertools.product(range(A.size), repeat=eq.var_count):
            lv, rv = _eval(A, eq.lhs, env), _eval(A, eq.rhs, env)
            if lv != rv:
                out.append(Violation(eq, env, lv, rv))
    return out


def is_model(A: FiniteAlgebra) -> bool:
    return not check_model(A)


def permute(A: FiniteAlgebra, sigma: Sequence[int]) -> FiniteAlgebra:
    """The isomorphic copy of ``A`` in which element ``x`` is renamed ``sigma[x]``."""
    return FiniteAlgebra.from_key(A.theory, A.size, _permuted_key(A, sigma))


def _permuted_key(A: FiniteAlgebra, sigma: Sequence[int]) -> tuple:
    s = A.size
    inv = [0] * s
    for x, y in enumerate(sigma):
        inv[y] = x
    out = []
    for i in cell_order(A.theory):
        arity = A.theory.signature[i].arity
        table = A.tables[i]
        for new_args in itertools.product(range(s), repeat=arity):
            out.append(sigma[table[_flat_index([inv[a] for a in new_args], s)]])
    return tuple(out)


def canonicalize(A: FiniteAlgebra) -> FiniteAlgebra:
    """The relabeling of ``A`` with the lexicographically smallest key."""
    best = min(_permuted_key(A, p) for p in itertools.permutations(range(A.size)))
    if best == A.key:
        return A
    return FiniteAlgebra.from_key(A.theory, A.size, best)


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return A.size == B.size and canonicalize(A).key == canonicalize(B).key


# --------------------------------------------------------------------------
# Backtracking search
#
# Cells of all tables are laid out in key order and filled left to right with
# values 0..s-1. Each equation instance (equation, environment) is evaluated
# against the partial tables; when evaluation runs into an empty cell the
# instance is parked on that cell's watch list and re-examined once the cell
# is filled. Watch-list additions are recorded on a trail and undone on
# backtrack.


def _compile(t: Term, offsets: dict[str, int]):
    if isinstance(t, Var):
        return t.index
    return (offsets[t.op.name], tuple(_compile(a, offsets) for a in t.args))


class _Search:
    def __init__(self, theory: Theory, size: int, max_nodes: int):
        self.size = size
        offsets: dict[str, int] = {}
        pos = 0
        for i in cell_order(theory):
            sym = theory.signature[i]
            offsets[sym.name] = pos
            pos += size ** sym.arity
        self.ncells = pos
        self.cells = [-1] * pos
        # value a cell must take, or -1; set when an instance pins it
        self.forced = [-1] * pos
        self.watches: list[list[int]] = [[] for _ in range(pos)]
        # entries c >= 0 undo a watch append on cell c, entries -1 - c a force
        self.trail: list[int] = []
        self.instances = []
        for eq in theory.equations:
            lhs, rhs = _compile(eq.lhs, offsets), _compile(eq.rhs, offsets)
            for env in itertools.product(range(size), repeat=eq.var_count):
                self.instances.append((lhs, rhs, env))
        self.nodes = 0
        self.max_nodes = max_nodes
        self.consistent = self._initial_watch()

    def _eval(self, node, env) -> int:
        """Value (>= 0) or ``-1 - cell`` for the first empty cell reached."""
        if node.__class__ is int:
            return env[node]
        off, args = node
        idx = 0
        s = self.size
        for a in args:
            v = self._eval(a, env)
            if v < 0:
                return v
            idx = idx * s + v
        c = self.cells[off + idx]
        return c if c >= 0 else -1 - (off + idx)

    def _root_cell(self, node, env) -> int:
        """Cell holding the top-level value of ``node`` once its arguments are known, else -1."""
        if node.__class__ is int:
            return -1
        off, args = node
        idx = 0
        for a in args:
            v = self._eval(a, env)
            if v < 0:
                return -1
            idx = idx * self.size + v
        return off + idx

    def _force(self, cell: int, value: int) -> bool:
        f = self.forced[cell]
        if f == value:
            return True
        if f >= 0:
            return False
        self.forced[cell] = value
        self.trail.append(-1 - cell)
        return True

    def _check(self, k: int) -> int:
        """-1: satisfied or settled by forcing, -2: violated, >= 0: blocked on that cell."""
        lhs, rhs, env = self.instances[k]
        lv = self._eval(lhs, env)
        rv = self._eval(rhs, env)
        if lv >= 0 and rv >= 0:
            return -1 if lv == rv else -2
        if lv >= 0:
            c = self._root_cell(rhs, env)
            if c >= 0:
                return -1 if self._force(c, lv) else -2
            return -1 - rv
        if rv >= 0:
            c = self._root_cell(lhs, env)
            if c >= 0:
                return -1 if self._force(c, rv) else -2
        return -1 - lv

    def _initial_watch(self) -> bool:
        for k in range(len(self.instances)):
            r = self._check(k)
            if r == -2:
                return False
            if r >= 0:
                self.watches[r].append(k)
        return True

    def _assign(self, pos: int, v: int) -> bool:
        self.cells[pos] = v
        watches, trail = self.watches, self.trail
        for k in watches[pos]:
            r = self._check(k)
            if r == -2:
                return False
            if r >= 0:
                watches[r].append(k)
                trail.append(r)
        return True

    def _undo(self, pos: int, mark: int):
        watches, trail, forced = self.watches, self.trail, self.forced
        while len(trail) > mark:
            c = trail.pop()
            if c >= 0:
                watches[c].pop()
            else:
                forced[-1 - c] = -1
        self.cells[pos] = -1

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise BoundExceeded(
                f"model search at size {self.size} exceeded {self.max_nodes} nodes",
                nodes=self.nodes, size=self.size,
            )

    def _values(self, pos: int):
        f = self.forced[pos]
        return (f,) if f >= 0 else range(self.size)

    def prefixes(self, length: int) -> list[tuple]:
        """All consistent assignments of the first ``length`` cells, in order."""
        out: list[tuple] = []
        if not self.consistent:
            return out
        length = min(length, self.ncells)

        def rec(pos, acc):
            if pos == length:
                out.append(tuple(acc))
                return
            for v in self._values(pos):
                self._tick()
                mark = len(self.trail)
                if self._assign(pos, v):
                    acc.append(v)
                    rec(pos + 1, acc)
                    acc.pop()
                self._undo(pos, mark)

        rec(0, [])
        return out

    def solve(self, prefix: tuple = ()) -> list[tuple]:
        out: list[tuple] = []
        if not self.consistent:
            return out
        for pos, v in enumerate(prefix):
            if self.forced[pos] not in (-1, v) or not self._assign(pos, v):
                return out
        cells = self.cells
        n = self.ncells

        def rec(pos):
            if pos == n:
                out.append(tuple(cells))
                return
            for v in self._values(pos):
                self._tick()
                mark = len(self.trail)
                if self._assign(pos, v):
                    rec(pos + 1)
                self._undo(pos, mark)

        rec(len(prefix))
        return out


# tasks per size are fixed independently of the worker count, so results and
# per-task node budgets do not depend on ``jobs``
_TARGET_TASKS = 64


def _prefix_length(size: int, ncells: int) -> int:
    p = 0
    while p < ncells and size ** p < _TARGET_TASKS:
        p += 1
    return p


def _solve_task(theory: Theory, size: int, prefix: tuple, max_nodes: int) -> list[tuple]:
    return _Search(theory, size, max_nodes).solve(prefix)


def _labeled_keys(theory: Theory, size: int, jobs: int, max_nodes: int) -> list[tuple]:
    if size == 0:
        if theory.constants:
            return []
        A = FiniteAlgebra.from_key(theory, 0, ())
        return [()] if is_model(A) else []
    root = _Search(theory, size, max_nodes)
    prefixes = root.prefixes(_prefix_length(size, root.ncells))
    if jobs <= 1 or len(prefixes) <= 1:
        chunks = [_solve_task(theory, size, p, max_nodes) for p in prefixes]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_solve_task, itertools.repeat(theory), itertools.repeat(size),
                                   prefixes, itertools.repeat(max_nodes)))
    keys = [k for chunk in chunks for k in chunk]
    keys.sort()
    return keys


def enumerate_models(theory: Theory, k: int, *, exact_size: bool = False,
                     up_to_iso: bool = False, jobs: int = 1,
                     max_nodes: int = DEFAULT_MAX_NODES,
                     allow_empty: bool = False) -> Iterator[FiniteAlgebra]:
    """Yield every model of ``theory`` of size ``1..k`` (or exactly ``k``).

    Output is ordered by size, then key; with ``up_to_iso`` only canonical
    forms are produced, one per isomorphism class. ``jobs`` changes speed,
    never output. Raises :class:`BoundExceeded` if any search task visits
    more than ``max_nodes`` nodes.
    """
    if k < 0 or (k == 0 and not allow_empty):
        raise ValueError("size bound must be at least 1")
    lo = k if exact_size else (0 if allow_empty else 1)
    for size in range(lo, k + 1):
        keys = _labeled_keys(theory, size, jobs, max_nodes)
        if up_to_iso:
            keys = sorted({canonicalize(FiniteAlgebra.from_key(theory, size, key)).key
                           for key in keys})
        for key in keys:
            yield FiniteAlgebra.from_key(theory, size, key)


def naive_models(theory: Theory, size: int) -> list[FiniteAlgebra]:
    """Every table assignment of the given size that passes :func:`check_model`.

    Exponential; meant as a reference for small signatures and sizes.
    """
    ncells = sum(size ** s.arity for s in theory.signature)
    out = []
    for key in itertools.product(range(size), repeat=ncells):
        A = FiniteAlgebra.from_key(theory, size, key)
        if is_model(A):
            out.append(A)
    return out
