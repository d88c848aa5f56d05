"""Acceptance criteria, one test (or parametrized group) per criterion.

Each test carries ``@pytest.mark.acceptance(number, text)``; the conftest
prints one ``[PASS]``/``[FAIL]`` line per criterion at the end of the run.
Expected values come from the slow oracles in ``oracles.py``, not from the
code under test.
"""

import io
import json
import sys
import time

import pytest

from lawvere import (EQUAL, FiniteAlgebra, FreeBoundExceeded, all_homs, builtin_theory,
                     check_naturality, check_validity, data_path, enumerate_homs,
                     enumerate_models, free_algebra, induced_family, models_up_to)
from lawvere.cli import run
from lawvere.terms import Equation, Var

from conftest import cyclic_group, klein_group
from oracles import (aci_normal_form, brute_homs, brute_natural_families, dedup_iso, ev,
                     groups_up_to_iso, naive_labeled, terms_up_to_depth)

acceptance = pytest.mark.acceptance


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue()


def timed(f):
    t0 = time.perf_counter()
    result = f()
    return result, time.perf_counter() - t0


# -- 1 ----------------------------------------------------------------------

@acceptance(1, "semilattice reconstruction at k=3 is EQUAL with clone sizes 1 and 3 (< 60 s)")
def test_semilattice_reconstruction(tmp_path):
    T = builtin_theory("semilattice")
    models = models_up_to(T, 3)
    homs = all_homs(models)
    # expected sizes fixed by the two oracles
    aci = {n: len({aci_normal_form(t) for t in terms_up_to_depth(T.signature, n, 3)})
           for n in (1, 2)}
    csp = {n: len(brute_natural_families(models, homs, n, 1)) for n in (1, 2)}
    assert aci == csp == {1: 1, 2: 3}

    (code, out), elapsed = timed(lambda: cli(
        "reconstruct", data_path("semilattice.thy"), "--max-arity", 2, "--max-coarity", 1,
        "--max-size", 3, "--depth", 3, "--no-cache"))
    report = json.loads(out)
    cells = {c["n"]: c for c in report["cells"]}
    assert code == 0
    for n in (1, 2):
        assert cells[n]["verdict"] == EQUAL
        assert len(cells[n]["term_ops"]) == cells[n]["natural_count"] == aci[n]
        assert free_algebra(T, n).size == aci[n]
    assert elapsed < 60


# -- 2 ----------------------------------------------------------------------

@acceptance(2, "pointed-set reconstruction for n=0,1,2 is EQUAL with clone sizes n+1 (< 10 s)")
def test_pointed_reconstruction():
    T = builtin_theory("pointed_set")
    models = models_up_to(T, 3)
    homs = all_homs(models)
    oracle = {n: len(brute_natural_families(models, homs, n, 1)) for n in (0, 1, 2)}
    assert oracle == {0: 1, 1: 2, 2: 3}

    (code, out), elapsed = timed(lambda: cli(
        "reconstruct", data_path("pointed_set.thy"), "--max-arity", 2, "--max-coarity", 1,
        "--max-size", 3, "--depth", 2, "--no-cache"))
    cells = json.loads(out)["cells"]
    assert code == 0
    assert [(c["n"], c["verdict"], len(c["term_ops"])) for c in cells] == \
        [(n, EQUAL, oracle[n]) for n in (0, 1, 2)]
    assert elapsed < 10


# -- 3 ----------------------------------------------------------------------

@acceptance(3, "model counts match the naive filter oracle (< 60 s)")
def test_model_counts():
    M, G = builtin_theory("monoid"), builtin_theory("group")

    def compute():
        return (
            list(enumerate_models(M, 2, exact_size=True)),
            [len(list(enumerate_models(G, s, exact_size=True, up_to_iso=True)))
             for s in (1, 2, 3, 4)],
            list(enumerate_models(M, 3, exact_size=True, up_to_iso=True)),
        )

    (labeled2, groups, iso3), elapsed = timed(compute)
    naive2 = naive_labeled(M, 2)
    assert len(naive2) == 4
    assert sorted(A.tables for A in labeled2) == sorted(naive2)

    assert groups == [groups_up_to_iso(s) for s in (1, 2, 3, 4)] == [1, 1, 1, 2]

    oracle3 = dedup_iso(M, 3, naive_labeled(M, 3))
    assert len(iso3) == len(oracle3) == 7   # also the published count of monoids of order 3
    assert elapsed < 60


# -- 4 ----------------------------------------------------------------------

@acceptance(4, "hom enumeration equals brute force for all monoid pairs of size <= 3")
def test_homs_brute_force():
    models = list(enumerate_models(builtin_theory("monoid"), 3))
    assert len(models) == 1 + 4 + 33
    discrepancies = 0
    for A in models:
        for B in models:
            if [f.map for f in enumerate_homs(A, B)] != brute_homs(A, B):
                discrepancies += 1
    assert discrepancies == 0


# -- 5 ----------------------------------------------------------------------

@acceptance(5, "every monoid term of depth <= 3 induces a natural family (models <= 3)")
def test_naturality_motto():
    M = builtin_theory("monoid")
    models = models_up_to(M, 3)
    homs = all_homs(models)
    checked = failures = 0
    for n in (0, 1, 2):
        for t in terms_up_to_depth(M.signature, n, 3):
            checked += 1
            if check_naturality(induced_family(t, n, models), homs) is not None:
                failures += 1
    assert checked > 20000
    assert failures == 0


# -- 6 ----------------------------------------------------------------------

@acceptance(6, "free semilattice on 2 generators has the universal property (models <= 3)")
def test_free_universal_property():
    T = builtin_theory("semilattice")
    F = free_algebra(T, 2)
    assert F.size == 3
    targets = list(enumerate_models(T, 3))
    assert len(targets) > 3
    for B in targets:
        homs = enumerate_homs(F.algebra, B)
        assert [f.map for f in homs] == brute_homs(F.algebra, B)
        for a in range(B.size):
            for b in range(B.size):
                ext = [f for f in homs if (f.map[F.generators[0]], f.map[F.generators[1]]) == (a, b)]
                assert len(ext) == 1


# -- 7 ----------------------------------------------------------------------

@acceptance(7, "sieve refutes commutativity at size 3 and keeps associativity at k=4")
def test_sieve(tmp_path):
    M = builtin_theory("monoid")
    comm = tmp_path / "comm.eqs"
    comm.write_text("eq comm (x y) : mul(x,y) = mul(y,x)\n")
    code, out = cli("sieve", data_path("monoid.thy"), "--candidates", comm, "--max-size", 3,
                    "--no-cache")
    assert code == 1
    (hit,) = json.loads(out)["refuted"]
    assert hit["size"] == 3
    witness = FiniteAlgebra.from_record(hit["model_record"], M)
    assert witness.digest == hit["model"]
    # independent re-evaluation with the oracle evaluator
    mul = M.symbol("mul")
    sig = {s.name: i for i, s in enumerate(M.signature)}
    lv = ev(witness.tables, sig, 3, mul(Var(0), Var(1)), hit["env"])
    rv = ev(witness.tables, sig, 3, mul(Var(1), Var(0)), hit["env"])
    assert (lv, rv) == (hit["lhs"], hit["rhs"]) and lv != rv
    lib = check_validity(M, Equation(2, mul(Var(0), Var(1)), mul(Var(1), Var(0))), 3)
    assert lib.model == witness

    assoc = tmp_path / "assoc.eqs"
    assoc.write_text("eq assoc (x y z) : mul(mul(x,y),z) = mul(x,mul(y,z))\n")
    code, out = cli("sieve", data_path("monoid.thy"), "--candidates", assoc, "--max-size", 4,
                    "--no-cache")
    assert code == 0 and json.loads(out)["surviving"] == ["assoc"]


# -- 8 ----------------------------------------------------------------------

@acceptance(8, "free monoid on 1 generator exceeds the bound with a strictly increasing trace")
def test_monoid_not_locally_finite():
    r = free_algebra(builtin_theory("monoid"), 1)
    assert isinstance(r, FreeBoundExceeded)
    assert len(r.trace) >= 3 and all(a < b for a, b in zip(r.trace, r.trace[1:]))
    code, out = cli("free", data_path("monoid.thy"), "--generators", 1)
    doc = json.loads(out)
    assert code == 3 and doc["status"] == "bound_exceeded" and doc["trace"] == list(r.trace)


# -- 9 ----------------------------------------------------------------------

def _determinism_cases(tmp):
    G = builtin_theory("group")
    v4, z4 = tmp / "v4.json", tmp / "z4.json"
    v4.write_text(json.dumps(klein_group(G).to_record()))
    z4.write_text(json.dumps(cyclic_group(G, 4).to_record()))
    cands = data_path("monoid_candidates.eqs")
    monoid, group, semi = (data_path(f"{n}.thy") for n in ("monoid", "group", "semilattice"))
    return {
        "check": ["check", group, "--model", v4],
        "models": ["models", group, "--max-size", 4],
        "models-iso": ["models", monoid, "--max-size", 3, "--up-to-iso"],
        "homs": ["homs", group, "--from", z4, "--to", v4],
        "auts": ["auts", group, "--model", v4],
        "free": ["free", semi, "--generators", 3],
        "clone": ["clone", semi, "--arity", 2, "--coarity", 1, "--max-size", 3],
        "reconstruct": ["reconstruct", monoid, "--max-arity", 1, "--max-coarity", 1,
                        "--max-size", 2, "--depth", 3],
        "sieve": ["sieve", monoid, "--candidates", cands, "--max-size", 3],
        "equiv": ["equiv", monoid, "--lhs", "mul(x,y)", "--rhs", "mul(y,x)", "--max-size", 3],
        "restrict": ["restrict", "--morphism", data_path("monoid_to_group.thm"), "--model", v4],
    }


@acceptance(9, "every subcommand is byte-identical at jobs=1 and jobs=8")
@pytest.mark.parametrize("name", ["check", "models", "models-iso", "homs", "auts", "free",
                                  "clone", "reconstruct", "sieve", "equiv", "restrict"])
def test_determinism(tmp_path, name):
    argv = _determinism_cases(tmp_path)[name]
    one = cli(*argv, "--jobs", 1, "--no-cache")
    eight = cli(*argv, "--jobs", 8, "--no-cache")
    assert one == eight
    assert one[1]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
