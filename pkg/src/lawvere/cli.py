"""Command-line interface.

Data goes to stdout as JSON (one record per line for ``models``, ``homs`` and
``auts``); diagnostics go to stderr. Exit codes: 0 success, 1 a negative
mathematical result (refuted candidate, EXTRA_NATURAL cell, failed model
check, invalid morphism, distinguished terms), 2 usage or parse error,
3 a search bound was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import FiniteAlgebra, check_model, theory_hash
from .cache import ModelCache
from .clone import (EXTRA_NATURAL, BOUND_EXCEEDED, natural_families, reconstruct_theory,
                    restrict_along, validate_theory_morphism)
from .dsl import (ParseError, default_var_names, format_equation, format_term, load_morphism,
                  load_theory, parse_candidates, parse_term)
from .errors import (BoundExceeded, InvalidMorphismError, LawvereError, MalformedTermError,
                     TableShapeError)
from .free import FreeAlgebra, free_algebra
from .homs import all_homs, automorphism_group, enumerate_homs
from .sieve import Distinguished, sieve_candidates, syntactic_equivalence

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _line(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _load_model(path: str, theory) -> FiniteAlgebra:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        record = json.loads(text) if len(lines) != 1 else json.loads(lines[0])
    except ValueError as exc:
        raise UsageError(f"{path}: not a JSON algebra record ({exc})") from None
    if not isinstance(record, dict):
        raise UsageError(f"{path}: expected a single algebra record")
    try:
        return FiniteAlgebra.from_record(record, theory)
    except TableShapeError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _violation_json(v) -> dict:
    return {"eq": v.equation.name, "env": list(v.env), "lhs": v.lhs_value, "rhs": v.rhs_value}


def _counterexample_json(ce) -> dict:
    return {
        "eq": ce.equation.name,
        "translated": format_equation(ce.translated, ce.model.theory, keyword=False),
        "model": ce.model.digest,
        "model_record": ce.model.to_record(),
        "env": list(ce.env),
        "lhs": ce.lhs_value,
        "rhs": ce.rhs_value,
    }


def _table(rows, headers) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    out += [fmt.format(*r) for r in rows]
    return "\n".join(out)


class _Run:
    def __init__(self, args, out, err):
        self.args = args
        self.out = out
        self.err = err
        self.cache = ModelCache(args.cache_dir, enabled=not args.no_cache)

    def emit(self, text: str):
        self.out.write(text + "\n")

    def pretty(self, rows, headers):
        if self.args.pretty:
            self.err.write(_table(rows, headers) + "\n")

    def models(self, theory, k):
        return self.cache.get_or_compute(theory, k, up_to_iso=True, jobs=self.args.jobs)

    # subcommands --------------------------------------------------------

    def cmd_check(self, a):
        T = load_theory(a.file)
        doc = {
            "theory": T.name,
            "theory_hash": theory_hash(T),
            "operations": [{"name": s.name, "arity": s.arity} for s in T.signature],
            "equations": [format_equation(eq, T, keyword=False) for eq in T.equations],
        }
        code = EXIT_OK
        if a.model:
            A = _load_model(a.model, T)
            violations = check_model(A)
            doc["model"] = A.digest
            doc["violations"] = [_violation_json(v) for v in violations]
            code = EXIT_NEGATIVE if violations else EXIT_OK
            self.pretty([(v.equation.name, v.env, v.lhs_value, v.rhs_value) for v in violations],
                        ["equation", "env", "lhs", "rhs"])
        self.emit(_dump(doc))
        return code

    def cmd_models(self, a):
        T = load_theory(a.file)
        models = self.cache.get_or_compute(T, a.max_size, up_to_iso=a.up_to_iso, jobs=self.args.jobs)
        if a.exact:
            models = [A for A in models if A.size == a.max_size]
        for A in models:
            self.emit(_line(A.to_record()))
        self.pretty([(A.size, A.digest[:12], A.key) for A in models], ["size", "hash", "key"])
        return EXIT_OK

    def cmd_homs(self, a):
        T = load_theory(a.file)
        A, B = _load_model(a.source, T), _load_model(a.target, T)
        homs = enumerate_homs(A, B, isos_only=a.isos_only)
        for f in homs:
            self.emit(_line(f.to_record()))
        self.pretty([(f.map,) for f in homs], ["map"])
        return EXIT_OK

    def cmd_auts(self, a):
        T = load_theory(a.file)
        A = _load_model(a.model, T)
        auts = automorphism_group(A)
        for f in auts:
            self.emit(_line(f.to_record()))
        self.pretty([(f.map,) for f in auts], ["automorphism"])
        return EXIT_OK

    def cmd_free(self, a):
        T = load_theory(a.file)
        r = free_algebra(T, a.generators, a.max_elements, a.max_depth)
        if isinstance(r, FreeAlgebra):
            names = default_var_names(a.generators, [s.name for s in T.signature])
            doc = {
                "theory": T.name,
                "generators": a.generators,
                "status": "finite",
                "size": r.size,
                "generator_elements": list(r.generators),
                "element_terms": [format_term(t, names) for t in r.element_terms],
                "algebra": r.algebra.to_record(),
                "trace": list(r.trace),
            }
            self.emit(_dump(doc))
            self.pretty(list(enumerate(doc["element_terms"])), ["element", "term"])
            return EXIT_OK
        doc = {
            "theory": T.name,
            "generators": a.generators,
            "status": "bound_exceeded",
            "classes_found": r.classes_found,
            "depth_reached": r.depth_reached,
            "trace": list(r.trace),
        }
        self.emit(_dump(doc))
        self.err.write(f"free algebra did not close within bounds: trace {list(r.trace)}\n")
        return EXIT_BOUND

    def cmd_clone(self, a):
        T = load_theory(a.file)
        models = self.models(T, a.max_size)
        fams = natural_families(T, a.arity, a.coarity, a.max_size, models=models,
                                homs=all_homs(models), method=a.method)
        doc = {
            "theory": T.name,
            "n": a.arity,
            "m": a.coarity,
            "k": a.max_size,
            "models": [A.digest for A in models],
            "count": len(fams),
            "families": [
                {"components": [[list(ys) for ys in comp] for comp in f.components]}
                for f in fams
            ],
        }
        self.emit(_dump(doc))
        self.pretty([(i, f.values()) for i, f in enumerate(fams)], ["family", "values"])
        return EXIT_OK

    def cmd_reconstruct(self, a):
        T = load_theory(a.file)
        models = self.models(T, a.max_size)
        report = reconstruct_theory(T, a.max_arity, a.max_coarity, a.max_size, a.depth,
                                    models=models)
        self.emit(_dump(report.to_json()))
        self.pretty([(c.n, c.m, c.clone_size, c.natural_count, c.verdict) for c in report.cells],
                    ["n", "m", "terms", "natural", "verdict"])
        if EXTRA_NATURAL in report.verdicts:
            return EXIT_NEGATIVE
        if BOUND_EXCEEDED in report.verdicts:
            return EXIT_BOUND
        return EXIT_OK

    def cmd_sieve(self, a):
        T = load_theory(a.file)
        try:
            text = Path(a.candidates).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"{a.candidates}: {exc.strerror}") from None
        eqs = parse_candidates(text, T, a.candidates)
        report = sieve_candidates(T, eqs, a.max_size, self.models(T, a.max_size))
        self.emit(_dump(report.to_json()))
        rows = [(eq.name, f"valid up to {a.max_size}") for eq in report.surviving]
        rows += [(eq.name, f"refuted at size {r.model.size}, env {r.env}") for eq, r in report.refuted]
        self.pretty(rows, ["candidate", "verdict"])
        return EXIT_NEGATIVE if report.refuted else EXIT_OK

    def cmd_equiv(self, a):
        T = load_theory(a.file)
        names = a.vars.split() if a.vars else None
        try:
            t1, names = parse_term(a.lhs, T, names)
            t2, names = parse_term(a.rhs, T, names)
        except ParseError as exc:
            raise UsageError(f"bad term: {exc}") from None
        n = len(names)
        verdict = syntactic_equivalence(T, t1, t2, n, a.max_size, self.models(T, a.max_size))
        doc = {"k": a.max_size, "vars": names, "lhs": format_term(t1, names),
               "rhs": format_term(t2, names)}
        if isinstance(verdict, Distinguished):
            doc.update(verdict="distinguished", model=verdict.model.digest,
                       model_record=verdict.model.to_record(), env=list(verdict.env),
                       lhs_value=verdict.lhs_value, rhs_value=verdict.rhs_value)
        else:
            doc["verdict"] = "equivalent"
        self.emit(_dump(doc))
        self.pretty([(doc["verdict"], doc.get("env", ""))], ["verdict", "env"])
        return EXIT_NEGATIVE if isinstance(verdict, Distinguished) else EXIT_OK

    def cmd_restrict(self, a):
        F = load_morphism(a.morphism)
        B = _load_model(a.model, F.target)
        ce = validate_theory_morphism(F, a.max_size, self.models(F.target, a.max_size))
        if ce is not None:
            self.emit(_dump({"status": "invalid_morphism", "counterexample": _counterexample_json(ce)}))
            self.err.write(f"morphism does not preserve {ce.equation.name}\n")
            return EXIT_NEGATIVE
        try:
            A = restrict_along(F, B)
        except InvalidMorphismError as exc:
            self.emit(_dump({"status": "invalid_morphism",
                             "counterexample": _counterexample_json(exc.counterexample)}))
            self.err.write(f"{exc}\n")
            return EXIT_NEGATIVE
        self.emit(_line(A.to_record()))
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for model search")
    common.add_argument("--cache-dir", default=None,
                        help="model cache directory (default: $LAWVERE_CACHE_DIR or ~/.cache/lawvere)")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("--pretty", action="store_true", help="also print a table to stderr")
    common.add_argument("-o", "--output", default=None, help="write data here instead of stdout")

    p = argparse.ArgumentParser(prog="lawvere", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="parse a theory, optionally check a model")
    s.add_argument("file")
    s.add_argument("--model")

    s = sub.add_parser("models", parents=[common], help="enumerate finite models")
    s.add_argument("file")
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--exact", action="store_true")
    s.add_argument("--up-to-iso", action="store_true")

    s = sub.add_parser("homs", parents=[common], help="list homomorphisms between two models")
    s.add_argument("file")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--isos-only", action="store_true")

    s = sub.add_parser("auts", parents=[common], help="automorphism group of a model")
    s.add_argument("file")
    s.add_argument("--model", required=True)

    s = sub.add_parser("free", parents=[common], help="free algebra on N generators")
    s.add_argument("file")
    s.add_argument("--generators", type=int, required=True)
    s.add_argument("--max-elements", type=int, default=64)
    s.add_argument("--max-depth", type=int, default=8)

    s = sub.add_parser("clone", parents=[common], help="natural families U^N => U^M")
    s.add_argument("file")
    s.add_argument("--arity", type=int, required=True)
    s.add_argument("--coarity", type=int, required=True)
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--method", choices=["auto", "csp", "yoneda"], default="auto")

    s = sub.add_parser("reconstruct", parents=[common], help="compare term operations with natural families")
    s.add_argument("file")
    s.add_argument("--max-arity", type=int, required=True)
    s.add_argument("--max-coarity", type=int, required=True)
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--depth", type=int, required=True)

    s = sub.add_parser("sieve", parents=[common], help="filter candidate equations by validity")
    s.add_argument("file")
    s.add_argument("--candidates", required=True)
    s.add_argument("--max-size", type=int, required=True)

    s = sub.add_parser("equiv", parents=[common], help="bounded semantic equality of two terms")
    s.add_argument("file")
    s.add_argument("--lhs", required=True)
    s.add_argument("--rhs", required=True)
    s.add_argument("--vars", default=None, help="variable names in order, space separated")
    s.add_argument("--max-size", type=int, required=True)

    s = sub.add_parser("restrict", parents=[common], help="pull a model back along a theory morphism")
    s.add_argument("--morphism", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--max-size", type=int, default=3, help="bound for validating the morphism")
    return p


def _validate(args):
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    for name in ("max_size", "generators", "arity", "coarity", "max_arity", "depth",
                 "max_elements", "max_depth"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name.replace('_', '-')} must be non-negative")
    if getattr(args, "max_size", 1) == 0:
        raise UsageError("--max-size must be at least 1")
    if getattr(args, "max_coarity", 1) < 1 or getattr(args, "coarity", 1) < 1:
        raise UsageError("coarity must be at least 1")


def run(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    sink = None
    try:
        _validate(args)
        if args.output:
            sink = open(args.output, "w", encoding="utf-8")
        runner = _Run(args, sink or out, err)
        return getattr(runner, f"cmd_{args.command}")(args)
    except ParseError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (UsageError, MalformedTermError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except BoundExceeded as exc:
        err.write(f"bound exceeded: {exc} {exc.stats}\n")
        return EXIT_BOUND
    except LawvereError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    finally:
        if sink is not None:
            sink.close()


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
