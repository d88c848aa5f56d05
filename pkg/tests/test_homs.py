import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lawvere import (FiniteAlgebra, Homomorphism, NaturalFamily, all_homs, automorphism_group,
                     check_naturality, enumerate_homs, enumerate_models, failed_square,
                     induced_family, is_homomorphism)
from lawvere.errors import MissingAlgebraError, SizeMismatchError
from lawvere.terms import Var

from conftest import cyclic_group, klein_group, or_monoid, z2_monoid
from oracles import brute_homs


def test_is_homomorphism_examples(monoid, group):
    Z2, OR = z2_monoid(monoid), or_monoid(monoid)
    assert is_homomorphism((0, 1), Z2, Z2)
    assert is_homomorphism((0, 0), Z2, OR)   # everything to e
    Z4, G2 = cyclic_group(group, 4), cyclic_group(group, 2)
    assert is_homomorphism((0, 1, 0, 1), Z4, G2)


def test_failed_square_is_first(group):
    Z4, G2 = cyclic_group(group, 4), cyclic_group(group, 2)
    bad = failed_square((0, 1, 1, 1), Z4, G2)
    assert bad is not None and bad.symbol.name == "mul" and bad.args == (1, 1)


def test_size_mismatch(monoid):
    Z2 = z2_monoid(monoid)
    with pytest.raises(SizeMismatchError):
        is_homomorphism((0,), Z2, Z2)
    with pytest.raises(SizeMismatchError):
        is_homomorphism((0, 2), Z2, Z2)


def test_hom_counts(group, monoid):
    Z2, Z3 = cyclic_group(group, 2), cyclic_group(group, 3)
    assert [f.map for f in enumerate_homs(Z2, Z2)] == [(0, 0), (0, 1)]
    assert [f.map for f in enumerate_homs(Z2, Z3)] == [(0, 0)]
    trivial = cyclic_group(group, 1)
    for B in (Z2, Z3, klein_group(group)):
        assert len(enumerate_homs(trivial, B)) == 1


def test_isos_only(group):
    Z3 = cyclic_group(group, 3)
    assert [f.map for f in enumerate_homs(Z3, Z3, isos_only=True)] == [(0, 1, 2), (0, 2, 1)]


def test_automorphism_groups(group):
    assert len(automorphism_group(cyclic_group(group, 2))) == 1
    assert [f.map for f in automorphism_group(cyclic_group(group, 3))] == [(0, 1, 2), (0, 2, 1)]
    V4 = klein_group(group)
    auts = automorphism_group(V4)
    assert len(auts) == 6
    brute = [p for p in itertools.permutations(range(4)) if is_homomorphism(p, V4, V4)]
    assert sorted(f.map for f in auts) == sorted(brute)


def test_homs_match_brute_force_monoids(monoid):
    models = list(enumerate_models(monoid, 3, up_to_iso=True))
    for A in models:
        for B in models:
            assert [f.map for f in enumerate_homs(A, B)] == brute_homs(A, B)


def test_composition_of_homs(monoid):
    models = list(enumerate_models(monoid, 3, up_to_iso=True))
    homs = all_homs(models)
    for f in homs:
        for g in homs:
            if f.target == g.source:
                h = f.then(g)
                assert is_homomorphism(h.map, h.source, h.target)


def test_naturality_examples(group, monoid):
    Z4, G2 = cyclic_group(group, 4), cyclic_group(group, 2)
    algs = (Z4, G2)
    ident = induced_family(Var(0), 1, algs)
    parity = Homomorphism(Z4, G2, (0, 1, 0, 1))
    assert check_naturality(ident, [parity]) is None

    # identity on Z4 but constant 0 on Z2
    broken = NaturalFamily(1, 1, algs, (ident.components[0], ((0,), (0,))))
    fail = check_naturality(broken, [parity])
    assert fail is not None and fail.args == (1,) and fail.hom == parity

    small = list(enumerate_models(monoid, 2))
    mul = monoid.symbol("mul")
    fam = induced_family(mul(Var(0), Var(1)), 2, small)
    assert check_naturality(fam, all_homs(small)) is None


def test_naturality_missing_algebra(group):
    Z4, G2 = cyclic_group(group, 4), cyclic_group(group, 2)
    fam = induced_family(Var(0), 1, (Z4,))
    with pytest.raises(MissingAlgebraError):
        check_naturality(fam, [Homomorphism(Z4, G2, (0, 1, 0, 1))])


@st.composite
def group_terms(draw, T, n):
    mul, inv, e = T.signature
    leaves = st.sampled_from([Var(i) for i in range(n)] + [e()])
    return draw(st.recursive(leaves, lambda c: st.one_of(
        st.tuples(c, c).map(lambda p: mul(*p)), c.map(inv)), max_leaves=10))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_term_families_are_natural(group, data):
    algs = [cyclic_group(group, 1), cyclic_group(group, 2), cyclic_group(group, 3),
            cyclic_group(group, 4), klein_group(group)]
    homs = all_homs(algs)
    ts = data.draw(st.lists(group_terms(group, 2), min_size=1, max_size=2))
    assert check_naturality(induced_family(ts, 2, algs), homs) is None


def test_records(monoid):
    Z2 = z2_monoid(monoid)
    rec = Homomorphism(Z2, Z2, (0, 1)).to_record()
    assert rec == {"source": Z2.digest, "target": Z2.digest, "map": [0, 1]}
    assert FiniteAlgebra.from_record(Z2.to_record(), monoid).digest == Z2.digest
