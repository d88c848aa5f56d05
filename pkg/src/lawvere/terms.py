"""Terms, equations, theory presentations and the Lawvere category they generate.

Variables are 0-based indices. A term over ``n`` variables is an ``n``-ary
operation; a tuple of ``m`` such terms is a morphism ``n -> m`` of the
Lawvere theory, and composition is simultaneous substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Sequence, Union

from .errors import CompositionError, IncompleteMorphismError, MalformedTermError


@dataclass(frozen=True)
class OperationSymbol:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name!r}")

    def __call__(self, *args: "Term") -> "App":
        return App(self, tuple(args))


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise MalformedTermError(f"negative variable index {self.index}")


@dataclass(frozen=True)
class App:
    op: OperationSymbol
    args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.op.arity:
            raise MalformedTermError(
                f"{self.op.name} takes {self.op.arity} arguments, got {len(self.args)}"
            )


Term = Union[Var, App]


def variables(n: int) -> tuple[Var, ...]:
    return tuple(Var(i) for i in range(n))


def var_bound(t: Term) -> int:
    """Smallest ``n`` such that ``t`` is well-formed over ``n`` variables."""
    if isinstance(t, Var):
        return t.index + 1
    return max((var_bound(a) for a in t.args), default=0)


def is_well_formed(t: Term, n: int) -> bool:
    return var_bound(t) <= n


def depth(t: Term) -> int:
    """Variables and constants have depth 0."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def symbols(t: Term) -> Iterator[OperationSymbol]:
    if isinstance(t, App):
        yield t.op
        for a in t.args:
            yield from symbols(a)


def substitute(t: Term, env: Sequence[Term]) -> Term:
    """Replace every ``Var(i)`` in ``t`` by ``env[i]``, simultaneously."""
    if isinstance(t, Var):
        if t.index >= len(env):
            raise MalformedTermError(
                f"variable {t.index} out of range for environment of length {len(env)}"
            )
        return env[t.index]
    return App(t.op, tuple(substitute(a, env) for a in t.args))


def rename_canonically(lhs: Term, rhs: Term) -> tuple[Term, Term, int]:
    """Renumber variables by first occurrence (lhs before rhs).

    Two equations that differ only by a renaming of variables (or by unused
    variables) get identical results.
    """
    order: dict[int, int] = {}

    def walk(t: Term):
        if isinstance(t, Var):
            order.setdefault(t.index, len(order))
        else:
            for a in t.args:
                walk(a)

    walk(lhs)
    walk(rhs)
    top = max(order, default=-1) + 1
    env = [Var(order.get(i, 0)) for i in range(top)]
    return substitute(lhs, env), substitute(rhs, env), len(order)


@dataclass(frozen=True)
class Equation:
    var_count: int
    lhs: Term
    rhs: Term
    name: str = ""

    def __post_init__(self):
        for side in (self.lhs, self.rhs):
            if not is_well_formed(side, self.var_count):
                raise MalformedTermError(
                    f"equation {self.name or '<anonymous>'}: term uses a variable "
                    f"outside its {self.var_count} bound variables"
                )

    def structural_key(self) -> tuple:
        """Identity up to renaming of variables; the name is ignored."""
        return rename_canonically(self.lhs, self.rhs)


@dataclass(frozen=True)
class Theory:
    name: str
    signature: tuple[OperationSymbol, ...] = ()
    equations: tuple[Equation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "signature", tuple(self.signature))
        object.__setattr__(self, "equations", tuple(self.equations))
        names = [s.name for s in self.signature]
        if len(set(names)) != len(names):
            raise ValueError(f"theory {self.name}: duplicate operation names")
        known = set(self.signature)
        for eq in self.equations:
            for side in (eq.lhs, eq.rhs):
                for s in symbols(side):
                    if s not in known:
                        raise MalformedTermError(
                            f"theory {self.name}: equation {eq.name!r} uses {s.name}/{s.arity},"
                            " which is not in the signature"
                        )

    def __getstate__(self):
        # cached_property values must not leak into pickles or comparisons
        return {k: getattr(self, k) for k in ("name", "signature", "equations")}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s.name: i for i, s in enumerate(self.signature)}

    def symbol(self, name: str) -> OperationSymbol:
        return self.signature[self._index[name]]

    def index_of(self, name: str) -> int:
        return self._index[name]

    def has_symbol(self, name: str) -> bool:
        return name in self._index

    @property
    def constants(self) -> tuple[OperationSymbol, ...]:
        return tuple(s for s in self.signature if s.arity == 0)


@dataclass(frozen=True)
class LawvereMorphism:
    """An edge ``domain -> codomain``: ``codomain`` terms over ``domain`` variables."""

    domain: int
    codomain: int
    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != self.codomain:
            raise MalformedTermError(
                f"morphism {self.domain}->{self.codomain} needs {self.codomain} components,"
                f" got {len(self.components)}"
            )
        for c in self.components:
            if not is_well_formed(c, self.domain):
                raise MalformedTermError(
                    f"component not well-formed over {self.domain} variables"
                )

    @classmethod
    def identity(cls, n: int) -> "LawvereMorphism":
        return cls(n, n, variables(n))

    @classmethod
    def operation(cls, op: OperationSymbol) -> "LawvereMorphism":
        return cls(op.arity, 1, (App(op, variables(op.arity)),))


def compose(f: LawvereMorphism, g: LawvereMorphism) -> LawvereMorphism:
    """``g`` after ``f``: first ``f: n -> m`` then ``g: m -> p``."""
    if f.codomain != g.domain:
        raise CompositionError(
            f"cannot compose {f.domain}->{f.codomain} with {g.domain}->{g.codomain}"
        )
    return LawvereMorphism(
        f.domain, g.codomain, tuple(substitute(c, f.components) for c in g.components)
    )


@dataclass(frozen=True)
class TheoryMorphism:
    """Interpretation of each source symbol as a target term in its arity.

    ``assignment`` maps source symbol names to target terms. Construction
    checks arities and symbols, not that axioms are preserved; see
    :func:`lawvere.clone.validate_theory_morphism` for that.
    """

    source: Theory
    target: Theory
    assignment: Mapping[str, Term] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))
        tgt = set(self.target.signature)
        for sym_name, term in self.assignment.items():
            if not self.source.has_symbol(sym_name):
                raise MalformedTermError(f"{sym_name} is not a symbol of {self.source.name}")
            arity = self.source.symbol(sym_name).arity
            if not is_well_formed(term, arity):
                raise MalformedTermError(
                    f"image of {sym_name} must be well-formed over {arity} variables"
                )
            for s in symbols(term):
                if s not in tgt:
                    raise MalformedTermError(
                        f"image of {sym_name} uses {s.name}, not in {self.target.name}"
                    )

    def is_total(self) -> bool:
        return all(s.name in self.assignment for s in self.source.signature)

    @classmethod
    def identity(cls, theory: Theory) -> "TheoryMorphism":
        return cls(
            theory, theory, {s.name: App(s, variables(s.arity)) for s in theory.signature}
        )


def translate(F: TheoryMorphism, t: Term) -> Term:
    if isinstance(t, Var):
        return t
    try:
        image = F.assignment[t.op.name]
    except KeyError:
        raise IncompleteMorphismError(
            f"morphism {F.name or '<anonymous>'} does not assign {t.op.name}"
        ) from None
    return substitute(image, [translate(F, a) for a in t.args])


def translate_equation(F: TheoryMorphism, eq: Equation) -> Equation:
    return Equation(eq.var_count, translate(F, eq.lhs), translate(F, eq.rhs), eq.name)
