import random

from hypothesis import given, settings, strategies as st

import oracles
from strategies import ground_terms
from tracelogic.intruder import (
    Constraint, ConstraintSeq, analyze, derivable_ground, reduce_constraints, solve,
)
from tracelogic.term import INTRUDER, Const, Enc, FreshNamer, Hash, Pair, Pk, Var, apply, ground

a, b, s, r, r1, re, ta = (Const(c) for c in ("a", "b", "s", "r", "r1", "re", "ta"))
X, Y = Var("X"), Var("Y")
BASE = (a, b, Pk(s), INTRUDER)


def sat(goal, knowledge):
    return bool(solve([Constraint(goal, tuple(knowledge))]))


def test_analyze_examples():
    assert set(analyze([Pair(a, b)])) == {Pair(a, b), a, b}
    assert r in analyze([Enc(r, Pk(INTRUDER))])
    assert r1 in analyze([Enc(r1, re), re])
    assert r not in analyze([Enc(r, Pk(s))])


def test_variable_goal_is_left_to_the_intruder():
    sols = solve([Constraint(X, BASE)], bind_residual=True, namer=FreshNamer())
    assert len(sols) == 1
    value = sols[0][X]
    assert isinstance(value, Const) and value.intruder


def test_unification_with_known_ciphertext():
    k = BASE + (Enc(Pair(ta, r1), Pk(s)),)
    assert solve([Constraint(Enc(Pair(X, r1), Pk(s)), k)]) == [{X: ta}]


def test_nothing_from_nothing():
    assert solve([Constraint(a, ())]) == []


def test_ground_oracle_examples():
    assert derivable_ground(Pair(a, b), [a, b])
    assert derivable_ground(r1, [Enc(r1, re), re])
    assert derivable_ground(Enc(Const("x"), Pk(s)), [Const("x"), Pk(s)])
    assert not derivable_ground(Const("x"), [Enc(Const("x"), Pk(s))])


def test_hash_is_one_way():
    assert not sat(r, [Hash(r)])
    assert sat(Hash(r), [r])


def test_constraint_sequence_shares_bindings():
    k1 = BASE + (Enc(Pair(ta, r1), Pk(s)),)
    alone = ConstraintSeq().extend(Enc(Pair(X, Y), Pk(s)), k1)
    assert solve(alone) == [{Y: r1, X: ta}, {}]
    # asking for Y on its own rules out the replay, since r1 is secret
    assert solve(alone.extend(Y, k1)) == [{}]


def test_binding_a_solved_variable_rechecks_it():
    k = BASE
    sols = reduce_constraints([Constraint(X, k)])
    assert len(sols) == 1
    sub, residual = sols[0]
    assert reduce_constraints(residual, {**sub, X: r}) == []
    assert reduce_constraints(residual, {**sub, X: a}) != []


def test_key_chosen_by_intruder_opens_later_ciphertext():
    # the intruder picked X earlier, so it can decrypt {r1}X it receives later
    k0 = BASE
    k1 = BASE + (Enc(r1, X),)
    sols = reduce_constraints([Constraint(X, k0), Constraint(r1, k1)])
    assert sols


def test_oracle_agreement_sample():
    for goal, kn in oracles.derivability_cases(1500, seed=5):
        assert sat(goal, kn) == derivable_ground(goal, kn), (goal, kn)


@settings(max_examples=150)
@given(ground_terms, st.lists(ground_terms, max_size=4), ground_terms)
def test_monotone_in_knowledge(goal, kn, extra):
    if sat(goal, kn):
        assert sat(goal, kn + [extra])


@settings(max_examples=150)
@given(st.lists(ground_terms, max_size=4), ground_terms)
def test_analyze_is_a_closure_operator(kn, extra):
    once = analyze(kn)
    assert set(kn) <= set(once)
    assert set(analyze(once)) == set(once)
    assert set(once) <= set(analyze(kn + [extra]))


@settings(max_examples=100)
@given(st.integers(0, 10_000))
def test_solutions_are_ground_derivable(seed):
    rng = random.Random(seed)
    pool = [a, b, r, Pk(s), Enc(Pair(ta, r1), Pk(s)), Enc(r, a), Pair(r1, b), Hash(a)]
    k1 = tuple(rng.sample(pool, 4)) + (INTRUDER,)
    k2 = k1 + (rng.choice(pool),)
    goals = [rng.choice([X, Pair(X, b), Enc(X, Pk(s)), Enc(Pair(X, r1), Pk(s)), Hash(X)]),
             rng.choice([Y, Pair(Y, X), Enc(Y, a)])]
    cons = [Constraint(goals[0], k1), Constraint(goals[1], k2)]
    for sol in solve(cons, bind_residual=True, namer=FreshNamer()):
        namer = FreshNamer()
        gmap = {}
        for c in cons:
            gk = [ground(apply(sol, t), namer, gmap) for t in c.knowledge]
            gg = ground(apply(sol, c.goal), namer, gmap)
            extra = [t for t in _atoms(gg) if t.intruder]
            assert derivable_ground(gg, gk + extra)


def _atoms(t):
    if isinstance(t, Const):
        yield t
    for c in t.children():
        yield from _atoms(c)
