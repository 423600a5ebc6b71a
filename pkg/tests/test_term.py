from hypothesis import given, strategies as st

from strategies import ATOMS, VARS, ground_terms, open_terms, terms
from tracelogic.term import (
    INTRUDER, Const, Enc, FreshNamer, Hash, Pair, Pk, Var, apply, depth, flatten_pair, ground,
    is_subterm, show, tuple_of, unify, variables, vernam,
)

a, b, s, x = Const("a"), Const("b"), Const("s"), Const("x")
r1, r2, ta, ni = Const("r1"), Const("r2"), Const("ta"), Const("ni")
X, Na = Var("X"), Var("Na")


def test_apply_examples():
    assert apply({}, Pk(s)) == Pk(s)
    assert apply({Na: ni}, Enc(Na, Pk(s))) == Enc(ni, Pk(s))
    assert apply({Var("A"): INTRUDER, Na: ni}, Na) == ni


def test_unify_examples():
    assert unify(a, a, {}) == {}
    assert unify(Na, ni, {}) == {Na: ni}
    assert unify(X, Pair(a, X), {}) is None
    assert unify(a, b, {}) is None
    assert unify(Pair(X, b), Pair(a, Var("Y")), {}) == {X: a, Var("Y"): b}


def test_unify_extends_under():
    assert unify(X, a, {X: b}) is None
    assert unify(Var("Y"), X, {X: a}) == {X: a, Var("Y"): a}


def test_subterm_examples():
    assert is_subterm(x, x)
    assert is_subterm(r1, Enc(Pair(ta, r1), Pk(s)))
    assert not is_subterm(r2, Hash(r1))
    assert is_subterm(s, Enc(a, Pk(s)))  # key positions count


def test_ground_examples():
    assert ground(a, FreshNamer()) == a
    g = ground(Pair(X, X), FreshNamer())
    assert g.left == g.right and g.left.intruder
    g = ground(Enc(X, Pk(s)), FreshNamer())
    assert g.key == Pk(s) and g.body.intruder and g.ground


def test_intruder_constant_is_distinct():
    assert INTRUDER == Const("eps")
    assert Const("eps", intruder=True) != INTRUDER
    assert show(INTRUDER) == "ε"


def test_surface_helpers():
    assert tuple_of(a, b, s) == Pair(a, Pair(b, s))
    assert flatten_pair(tuple_of(a, b, s)) == [a, b, s]
    assert vernam(r1, r2) == Enc(r2, r1)
    assert show(Pair(Pair(a, b), s)) == "(a,b),s"
    assert show(Enc(tuple_of(ta, r1), Pk(s))) == "{ta,r1}pk(s)"
    assert show(Var("A", 2)) == "A_2"
    assert depth(Enc(Pair(a, b), Pk(s))) == 3


@given(open_terms, open_terms)
def test_unifier_makes_terms_equal(t1, t2):
    u = unify(t1, t2, {})
    if u is not None:
        assert apply(u, t1) == apply(u, t2)
        for v, t in u.items():
            assert v not in variables(t)
        assert {k: apply(u, t) for k, t in u.items()} == u  # idempotent


@given(open_terms, st.fixed_dictionaries({v: ground_terms for v in VARS}))
def test_unifier_is_most_general(t, inst):
    target = apply(inst, t)
    u = unify(t, target, {})
    assert u is not None
    # the known instance is an instance of the mgu's image
    assert unify(apply(u, t), target, {}) is not None
    assert all(apply(inst, apply(u, v)) == apply(inst, v) for v in variables(t))


@given(open_terms, open_terms, st.fixed_dictionaries({v: ground_terms for v in VARS}))
def test_apply_is_homomorphic(l, r, sub):
    for cons in (Pair, Enc):
        assert apply(sub, cons(l, r)) == cons(apply(sub, l), apply(sub, r))
    for cons in (Hash, Pk):
        assert apply(sub, cons(l)) == cons(apply(sub, l))


@given(open_terms, st.fixed_dictionaries({v: open_terms for v in VARS[:1]}))
def test_apply_idempotent_substitution(t, sub):
    if all(v not in variables(u) for v, u in sub.items()):
        assert apply(sub, apply(sub, t)) == apply(sub, t)


@given(terms(max_leaves=6), terms(max_leaves=6), terms(max_leaves=6))
def test_subterm_order(x1, y1, z1):
    assert is_subterm(x1, x1)
    if is_subterm(x1, y1) and is_subterm(y1, z1):
        assert is_subterm(x1, z1)
    if is_subterm(x1, y1) and is_subterm(y1, x1):
        assert x1 == y1


@given(open_terms)
def test_ground_replaces_every_variable(t):
    g = ground(t, FreshNamer())
    assert g.ground
    assert g.size == t.size
