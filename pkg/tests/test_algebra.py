import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lawvere import (FiniteAlgebra, builtin_theory, canonicalize, check_model, enumerate_models,
                     evaluate, is_isomorphic, parse_theory, permute)
from lawvere.errors import BoundExceeded, EvaluationError, TableShapeError
from lawvere.terms import App, OperationSymbol, Theory, Var, substitute

from conftest import or_monoid, z2_monoid
from oracles import dedup_iso, naive_labeled, satisfies

x, y, z = Var(0), Var(1), Var(2)


def test_evaluate_examples(monoid):
    Z2 = z2_monoid(monoid)
    mul = monoid.symbol("mul")
    assert evaluate(Z2, x, (1,)) == 1
    assert evaluate(Z2, mul(x, x), (1,)) == 0
    assert evaluate(or_monoid(monoid), mul(x, y), (1, 0)) == 1


def test_evaluate_errors(monoid):
    Z2 = z2_monoid(monoid)
    mul = monoid.symbol("mul")
    with pytest.raises(EvaluationError):
        evaluate(Z2, x, (2,))
    with pytest.raises(EvaluationError):
        evaluate(Z2, mul(x, y), (1,))


def test_check_model_examples(monoid):
    assert check_model(z2_monoid(monoid)) == []

    magma = parse_theory("theory M\n op mul : 2\n eq assoc (x y z) : mul(mul(x,y),z) = mul(x,mul(y,z))\nend")
    sub = FiniteAlgebra.from_functions(magma, 3, mul=lambda a, b: (a - b) % 3)
    v = check_model(sub)
    assert v and v[0].env == (0, 0, 1)
    at111 = [w for w in v if w.env == (1, 1, 1)]
    assert (at111[0].lhs_value, at111[0].rhs_value) == (2, 1)
    assert [w.env for w in v] == sorted(w.env for w in v)

    bad = FiniteAlgebra(monoid, 2, ((0, 1, 1, 0), (1,)))
    first_unit = [w for w in check_model(bad) if w.equation.name == "left_unit"][0]
    assert first_unit.env == (0,) and (first_unit.lhs_value, first_unit.rhs_value) == (1, 0)


def test_violations_reevaluate(monoid):
    bad = FiniteAlgebra(monoid, 2, ((1, 1, 0, 0), (0,)))
    for w in check_model(bad):
        assert w.lhs_value != w.rhs_value
        assert evaluate(bad, w.equation.lhs, w.env) == w.lhs_value
        assert evaluate(bad, w.equation.rhs, w.env) == w.rhs_value


def test_table_shapes_checked(monoid):
    with pytest.raises(TableShapeError):
        FiniteAlgebra(monoid, 2, ((0, 1, 1), (0,)))
    with pytest.raises(TableShapeError):
        FiniteAlgebra(monoid, 2, ((0, 1, 1, 2), (0,)))
    with pytest.raises(TableShapeError):
        FiniteAlgebra(monoid, 2, ((0, 1, 1, 0),))


def test_enumerate_examples(monoid, bare_sets):
    assert len(list(enumerate_models(bare_sets, 3, exact_size=True))) == 1
    assert len(list(enumerate_models(monoid, 2, exact_size=True))) == 4   # [DERIVED]
    assert len(list(enumerate_models(monoid, 3, exact_size=True, up_to_iso=True))) == 7


def test_monoid_counts_match_oracle(monoid):
    for s in (1, 2, 3):
        oracle = naive_labeled(monoid, s) if s < 3 else None
        got = list(enumerate_models(monoid, s, exact_size=True))
        if oracle is not None:
            assert sorted(A.tables for A in got) == sorted(oracle)
        iso = list(enumerate_models(monoid, s, exact_size=True, up_to_iso=True))
        reps = dedup_iso(monoid, s, [A.tables for A in got])
        assert len(iso) == len(reps)


def test_enumerate_rejects_zero_bound(monoid):
    with pytest.raises(ValueError):
        list(enumerate_models(monoid, 0))


def test_empty_carrier_flag(bare_sets, monoid):
    assert [A.size for A in enumerate_models(bare_sets, 1, allow_empty=True)] == [0, 1]
    assert [A.size for A in enumerate_models(monoid, 1, allow_empty=True)] == [1]


def test_node_budget(group):
    with pytest.raises(BoundExceeded) as info:
        list(enumerate_models(group, 4, max_nodes=5))
    assert "nodes" in info.value.stats


def test_output_sorted_and_valid(monoid):
    models = list(enumerate_models(monoid, 3))
    assert [A.sort_key() for A in models] == sorted(A.sort_key() for A in models)
    assert all(check_model(A) == [] for A in models)


def test_jobs_do_not_change_output(semilattice):
    a = [A.key for A in enumerate_models(semilattice, 4, up_to_iso=True, jobs=1)]
    b = [A.key for A in enumerate_models(semilattice, 4, up_to_iso=True, jobs=3)]
    assert a == b


def test_canonicalize_examples(monoid):
    Z2 = z2_monoid(monoid)
    assert canonicalize(Z2) == Z2
    flipped = z2_monoid(monoid, identity=1)
    assert canonicalize(flipped) == Z2
    assert canonicalize(flipped).constant("e") == 0
    assert is_isomorphic(flipped, Z2)
    assert not is_isomorphic(Z2, or_monoid(monoid))


def test_canonicalize_orbit(monoid):
    for A in enumerate_models(monoid, 3, exact_size=True):
        c = canonicalize(A)
        assert canonicalize(c) == c
        for sigma in itertools.permutations(range(3)):
            assert canonicalize(permute(A, sigma)) == c


def test_record_round_trip(group):
    A = FiniteAlgebra.from_functions(group, 3, mul=lambda a, b: (a + b) % 3,
                                     inv=lambda a: -a % 3, e=0)
    rec = A.to_record()
    assert rec["tables"]["e"] == 0 and rec["tables"]["inv"] == [0, 2, 1]
    assert FiniteAlgebra.from_record(rec, group) == A
    with pytest.raises(TableShapeError):
        FiniteAlgebra.from_record(rec, builtin_theory("monoid"))


# -- properties ---------------------------------------------------------------

@st.composite
def small_theories(draw):
    """Random theories with at most two symbols and two short equations."""
    arities = draw(st.lists(st.integers(0, 2), min_size=0, max_size=2))
    sig = tuple(OperationSymbol(f"f{i}", a) for i, a in enumerate(arities))

    def term(n, fuel):
        leaves = [Var(i) for i in range(n)] + [App(s) for s in sig if s.arity == 0]
        ops = [s for s in sig if s.arity > 0] if fuel > 0 else []
        pick = draw(st.sampled_from(leaves + ops)) if leaves + ops else None
        if pick is None or not isinstance(pick, OperationSymbol):
            return pick
        args = tuple(term(n, fuel - 1) for _ in range(pick.arity))
        return None if None in args else pick(*args)

    from lawvere.terms import Equation
    eqs = []
    for i in range(draw(st.integers(0, 2))):
        n = draw(st.integers(1, 3))
        lhs, rhs = term(n, 2), term(n, 2)
        if lhs is not None and rhs is not None:
            eqs.append(Equation(n, lhs, rhs, f"e{i}"))
    return Theory("R", sig, tuple(eqs))


@settings(max_examples=60, deadline=None)
@given(small_theories())
def test_enumeration_equals_naive_filter(T):
    for s in (1, 2):
        got = sorted(A.tables for A in enumerate_models(T, s, exact_size=True))
        assert got == sorted(naive_labeled(T, s))
        assert all(satisfies(T, s, t) for t in got)


@settings(max_examples=60)
@given(st.data())
def test_evaluate_commutes_with_substitution(data):
    T = builtin_theory("group")
    A = FiniteAlgebra.from_functions(T, 4, mul=lambda a, b: a ^ b, inv=lambda a: a, e=0)
    mul, inv, e = T.signature

    def terms(n):
        leaves = st.sampled_from([Var(i) for i in range(n)] + [e()])
        return st.recursive(leaves, lambda c: st.one_of(
            st.tuples(c, c).map(lambda p: mul(*p)), c.map(inv)), max_leaves=8)

    t = data.draw(terms(2))
    env_terms = data.draw(st.lists(terms(3), min_size=2, max_size=2))
    rho = data.draw(st.tuples(*[st.integers(0, 3)] * 3))
    lhs = evaluate(A, substitute(t, env_terms), rho)
    rhs = evaluate(A, t, [evaluate(A, u, rho) for u in env_terms])
    assert lhs == rhs
