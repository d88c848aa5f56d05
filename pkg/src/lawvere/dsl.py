"""Text format for theories, candidate equations and theory morphisms.

A theory file::

    # comments start with '#'
    theory Monoid
      op mul : 2
      op e : 0
      eq assoc (x y z) : mul(mul(x,y),z) = mul(x,mul(y,z))
      eq left_unit (x) : mul(e(),x) = x
      eq right_unit (x) : mul(x,e()) = x
    end

A candidate file holds bare ``eq`` lines (the ``eq`` keyword is optional).
A morphism file holds theory blocks (or ``include "path"`` lines) followed by::

    morphism opposite : Monoid -> Monoid
      map mul (x y) : mul(y,x)
      map e () : e()
    end
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .terms import App, Equation, OperationSymbol, Term, Theory, TheoryMorphism, Var

IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
_IDENT_RE = re.compile(IDENT)

KINDS = ("unknown-symbol", "arity-mismatch", "unbound-variable", "duplicate-name", "syntax")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0


class ParseError(Exception):
    def __init__(self, kind: str, span: SourceSpan, message: str, source: str | None = None):
        assert kind in KINDS, kind
        super().__init__(message)
        self.kind = kind
        self.span = span
        self.message = message
        self.source = source

    def __str__(self) -> str:
        where = f"{self.source}:" if self.source else ""
        return f"{where}{self.span.line}:{self.span.column}: {self.kind}: {self.message}"


class _Line:
    """Cursor over one source line; columns are 1-based in reported spans."""

    def __init__(self, text: str, lineno: int, source: str | None):
        self.text = text
        self.lineno = lineno
        self.pos = 0
        self.source = source

    def error(self, kind, message, start=None, length=1) -> ParseError:
        start = self.pos if start is None else start
        start = min(start, len(self.text))
        length = max(0, min(length, len(self.text) - start))
        return ParseError(kind, SourceSpan(self.lineno, start + 1, length), message, self.source)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        self.skip_ws()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        self.skip_ws()
        if not self.text.startswith(s, self.pos):
            found = self.text[self.pos:self.pos + 1] or "end of line"
            raise self.error("syntax", f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def ident(self, what="identifier") -> tuple[str, int]:
        self.skip_ws()
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            found = self.text[self.pos:self.pos + 1] or "end of line"
            raise self.error("syntax", f"expected {what}, found {found!r}")
        self.pos = m.end()
        return m.group(), m.start()

    def integer(self) -> int:
        self.skip_ws()
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            raise self.error("syntax", "expected a non-negative integer")
        self.pos = m.end()
        return int(m.group())

    def finish(self):
        if not self.at_end():
            raise self.error("syntax", f"unexpected trailing text {self.text[self.pos:]!r}",
                             length=len(self.text) - self.pos)


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _lines(text: str, source: str | None):
    for i, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).rstrip()
        if body.strip():
            yield _Line(body, i, source)


def _parse_var_list(cur: _Line, signature: dict[str, OperationSymbol]) -> list[str]:
    cur.expect("(")
    names: list[str] = []
    while not cur.peek(")"):
        name, start = cur.ident("variable name")
        if name in names:
            raise cur.error("duplicate-name", f"variable {name!r} listed twice", start, len(name))
        if name in signature:
            raise cur.error("duplicate-name", f"variable {name!r} clashes with an operation",
                            start, len(name))
        names.append(name)
        if cur.peek(","):
            cur.expect(",")
    cur.expect(")")
    return names


def _parse_term(cur: _Line, signature: dict[str, OperationSymbol], var_names) -> Term:
    name, start = cur.ident("term")
    if cur.peek("("):
        cur.expect("(")
        args: list[Term] = []
        if not cur.peek(")"):
            args.append(_parse_term(cur, signature, var_names))
            while cur.peek(","):
                cur.expect(",")
                args.append(_parse_term(cur, signature, var_names))
        cur.expect(")")
        if name not in signature:
            raise cur.error("unknown-symbol", f"unknown operation {name!r}", start, len(name))
        op = signature[name]
        if len(args) != op.arity:
            raise cur.error("arity-mismatch",
                            f"{name} takes {op.arity} argument(s), got {len(args)}",
                            start, cur.pos - start)
        return App(op, tuple(args))
    if isinstance(var_names, _AutoVars):
        if name in signature:
            raise _bare_op_error(cur, signature[name], start)
        return Var(var_names.index(name))
    if name in var_names:
        return Var(var_names.index(name))
    if name in signature:
        raise _bare_op_error(cur, signature[name], start)
    raise cur.error("unbound-variable", f"variable {name!r} is not bound", start, len(name))


def _bare_op_error(cur, op, start):
    if op.arity == 0:
        return cur.error("syntax", f"constant {op.name} must be written {op.name}()",
                         start, len(op.name))
    return cur.error("arity-mismatch", f"{op.name} takes {op.arity} argument(s), got none",
                     start, len(op.name))


class _AutoVars(list):
    """Binds unknown identifiers to fresh variables in order of appearance."""

    def index(self, name):  # type: ignore[override]
        if name not in self:
            self.append(name)
        return list.index(self, name)


def _parse_equation_body(cur: _Line, signature, seen_names: set, require_eq: bool) -> Equation:
    if cur.peek("eq") and re.match(r"eq\b", cur.text[cur.pos:]):
        cur.expect("eq")
    elif require_eq:
        raise cur.error("syntax", "expected 'eq'")
    name, start = cur.ident("equation name")
    if name in seen_names:
        raise cur.error("duplicate-name", f"equation {name!r} already defined", start, len(name))
    var_names = _parse_var_list(cur, signature)
    cur.expect(":")
    lhs = _parse_term(cur, signature, var_names)
    cur.expect("=")
    rhs = _parse_term(cur, signature, var_names)
    cur.finish()
    seen_names.add(name)
    return Equation(len(var_names), lhs, rhs, name)


class _TheoryBuilder:
    def __init__(self, name: str):
        self.name = name
        self.ops: dict[str, OperationSymbol] = {}
        self.equations: list[Equation] = []
        self.eq_names: set[str] = set()

    def line(self, cur: _Line):
        if cur.peek("op") and re.match(r"op\b", cur.text[cur.pos:]):
            cur.expect("op")
            name, start = cur.ident("operation name")
            if name in self.ops:
                raise cur.error("duplicate-name", f"operation {name!r} already declared",
                                start, len(name))
            cur.expect(":")
            arity = cur.integer()
            cur.finish()
            self.ops[name] = OperationSymbol(name, arity)
        elif cur.peek("eq") and re.match(r"eq\b", cur.text[cur.pos:]):
            self.equations.append(_parse_equation_body(cur, self.ops, self.eq_names, True))
        else:
            raise cur.error("syntax", "expected 'op', 'eq' or 'end'")

    def build(self) -> Theory:
        return Theory(self.name, tuple(self.ops.values()), tuple(self.equations))


def _parse_blocks(text: str, source: str | None, base_dir: Path | None,
                  allow_include: bool = False):
    theories: dict[str, Theory] = {}
    morphisms: list[TheoryMorphism] = []
    lines = list(_lines(text, source))
    i = 0

    def block_body(header: _Line, handler):
        nonlocal i
        while i < len(lines):
            cur = lines[i]
            i += 1
            if cur.text.strip() == "end":
                return
            handler(cur)
        raise header.error("syntax", "block is missing its 'end'", 0, len(header.text))

    while i < len(lines):
        cur = lines[i]
        i += 1
        kw, start = cur.ident("'theory', 'morphism' or 'include'")
        if kw == "theory":
            name, nstart = cur.ident("theory name")
            cur.finish()
            if name in theories:
                raise cur.error("duplicate-name", f"theory {name!r} already defined",
                                nstart, len(name))
            builder = _TheoryBuilder(name)
            block_body(cur, builder.line)
            theories[name] = builder.build()
        elif kw == "morphism":
            morphisms.append(_parse_morphism_block(cur, theories, block_body))
        elif kw == "include":
            if not allow_include:
                raise cur.error("syntax", "include is only allowed in morphism files",
                                start, len(kw))
            cur.expect('"')
            end = cur.text.find('"', cur.pos)
            if end < 0:
                raise cur.error("syntax", "unterminated include path")
            rel = cur.text[cur.pos:end]
            cur.pos = end + 1
            cur.finish()
            path = (base_dir or Path.cwd()) / rel
            try:
                inc_text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise cur.error("syntax", f"cannot read {rel}: {exc.strerror}",
                                start, len(cur.text)) from None
            inc_theories, _ = _parse_blocks(inc_text, str(path), path.parent)
            for name, th in inc_theories.items():
                if name in theories:
                    raise cur.error("duplicate-name", f"theory {name!r} already defined",
                                    start, len(cur.text))
                theories[name] = th
        else:
            raise cur.error("syntax", f"unknown keyword {kw!r}", start, len(kw))
    return theories, morphisms


def _parse_morphism_block(cur: _Line, theories, block_body) -> TheoryMorphism:
    name, _ = cur.ident("morphism name")
    cur.expect(":")
    src_name, s0 = cur.ident("source theory")
    cur.expect("->")
    tgt_name, t0 = cur.ident("target theory")
    cur.finish()
    for nm, st in ((src_name, s0), (tgt_name, t0)):
        if nm not in theories:
            raise cur.error("unknown-symbol", f"unknown theory {nm!r}", st, len(nm))
    src, tgt = theories[src_name], theories[tgt_name]
    tgt_sig = {s.name: s for s in tgt.signature}
    assignment: dict[str, Term] = {}

    def handle(line: _Line):
        line.expect("map")
        sym, st = line.ident("source symbol")
        if not src.has_symbol(sym):
            raise line.error("unknown-symbol", f"{sym!r} is not an operation of {src.name}",
                             st, len(sym))
        if sym in assignment:
            raise line.error("duplicate-name", f"{sym!r} mapped twice", st, len(sym))
        var_names = _parse_var_list(line, tgt_sig)
        arity = src.symbol(sym).arity
        if len(var_names) != arity:
            raise line.error("arity-mismatch",
                             f"{sym} has arity {arity} but {len(var_names)} variable(s) bound",
                             st, len(sym))
        line.expect(":")
        assignment[sym] = _parse_term(line, tgt_sig, var_names)
        line.finish()

    block_body(cur, handle)
    missing = [s.name for s in src.signature if s.name not in assignment]
    if missing:
        raise cur.error("unknown-symbol", f"morphism {name} does not map {', '.join(missing)}",
                        0, len(cur.text))
    return TheoryMorphism(src, tgt, assignment, name)


def parse_theory(text: str, source: str | None = None) -> Theory:
    """Parse a text holding exactly one theory block."""
    theories, morphisms = _parse_blocks(text, source, None)
    if len(theories) != 1 or morphisms:
        raise ParseError("syntax", SourceSpan(1, 1, 0),
                         f"expected exactly one theory block, found {len(theories)}", source)
    return next(iter(theories.values()))


def parse_candidates(text: str, theory: Theory, source: str | None = None) -> list[Equation]:
    """Candidate equations over ``theory``'s signature, in file order.

    Repeated equation *names* are rejected; repeated equations under
    different names are kept (the sieve deduplicates them).
    """
    signature = {s.name: s for s in theory.signature}
    names: set[str] = set()
    return [_parse_equation_body(cur, signature, names, False) for cur in _lines(text, source)]


def parse_term(text: str, theory: Theory, var_names: Sequence[str] | None = None,
               ) -> tuple[Term, list[str]]:
    """Parse one term; returns the term and the variable names in index order.

    With ``var_names=None`` every non-operation identifier becomes a variable,
    numbered by first appearance.
    """
    signature = {s.name: s for s in theory.signature}
    cur = _Line(text.strip(), 1, None)
    names = _AutoVars() if var_names is None else list(var_names)
    t = _parse_term(cur, signature, names)
    cur.finish()
    return t, list(names)


def parse_morphism_document(text: str, source: str | None = None,
                            base_dir: Path | None = None) -> TheoryMorphism:
    theories, morphisms = _parse_blocks(text, source, base_dir, allow_include=True)
    if len(morphisms) != 1:
        raise ParseError("syntax", SourceSpan(1, 1, 0),
                         f"expected exactly one morphism block, found {len(morphisms)}", source)
    return morphisms[0]


def load_theory(path) -> Theory:
    path = Path(path)
    return parse_theory(path.read_text(encoding="utf-8"), str(path))


def load_morphism(path) -> TheoryMorphism:
    path = Path(path)
    return parse_morphism_document(path.read_text(encoding="utf-8"), str(path), path.parent)


def format_term(t: Term, var_names: Sequence[str]) -> str:
    if isinstance(t, Var):
        return var_names[t.index]
    return f"{t.op.name}({','.join(format_term(a, var_names) for a in t.args)})"


_DEFAULT_NAMES = ("x", "y", "z", "w", "u", "v")


def default_var_names(n: int, avoid=()) -> list[str]:
    """``x, y, z, w, u, v`` then ``x6, x7, ...``, skipping anything in ``avoid``."""
    avoid = set(avoid)
    out: list[str] = []
    i = 0
    while len(out) < n:
        cand = _DEFAULT_NAMES[i] if i < len(_DEFAULT_NAMES) else f"x{i}"
        while cand in avoid:
            cand += "_"
        out.append(cand)
        i += 1
    return out


def format_equation(eq: Equation, theory: Theory | None = None, keyword: bool = True) -> str:
    avoid = [s.name for s in theory.signature] if theory else ()
    names = default_var_names(eq.var_count, avoid)
    head = "eq " if keyword else ""
    return (f"{head}{eq.name or 'unnamed'} ({' '.join(names)}) : "
            f"{format_term(eq.lhs, names)} = {format_term(eq.rhs, names)}")


def render_theory(theory: Theory) -> str:
    """Canonical text of ``theory``; ``parse_theory`` inverts it."""
    out = [f"theory {theory.name}"]
    out += [f"  op {s.name} : {s.arity}" for s in theory.signature]
    out += ["  " + format_equation(eq, theory) for eq in theory.equations]
    out.append("end")
    return "\n".join(out) + "\n"


def render_morphism(F: TheoryMorphism) -> str:
    names = default_var_names(max((s.arity for s in F.source.signature), default=0),
                              [s.name for s in F.target.signature])
    out = [render_theory(F.source)]
    if F.target != F.source:
        out.append(render_theory(F.target))
    out.append(f"morphism {F.name or 'F'} : {F.source.name} -> {F.target.name}")
    for s in F.source.signature:
        vs = names[:s.arity]
        out.append(f"  map {s.name} ({' '.join(vs)}) : {format_term(F.assignment[s.name], vs)}")
    out.append("end")
    return "\n".join(out) + "\n"
