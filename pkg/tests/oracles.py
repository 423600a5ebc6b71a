"""Brute-force references used to cross-check the evaluator and the solver."""
import itertools
import random

from tracelogic import logic
from tracelogic.model import RECV, SEND, Event
from tracelogic.term import INTRUDER, Const, Enc, Hash, Pair, Pk

a, b, s, k, n = (Const(c) for c in "abskn")


def subterm(small, big):
    if small == big:
        return True
    return any(subterm(small, c) for c in big.children())


def _event(p, trace, env):
    if isinstance(p, logic.EventVar):
        ev = trace[env[p.name]]
        return (ev.actor, ev.message, ev.peer, ev.direction)
    return (p.actor, p.message, p.peer, p.direction)


def _term(r, trace, env):
    return trace[env[r.event]].message if isinstance(r, logic.Msg) else r


def truth(f, trace, env=None):
    """The boolean semantic table, evaluated directly on a ground formula."""
    env = env or {}
    t = type(f)
    if t is logic.TrueF:
        return True
    if t is logic.FalseF:
        return False
    if t is logic.Labeled:
        return truth(f.body, trace, env)
    if t is logic.And:
        return truth(f.left, trace, env) and truth(f.right, trace, env)
    if t is logic.Or:
        return truth(f.left, trace, env) or truth(f.right, trace, env)
    if t is logic.Implies:
        return (not truth(f.left, trace, env)) or truth(f.right, trace, env)
    if t is logic.Not:
        return not truth(f.body, trace, env)
    if t is logic.ExistsEvent:
        return any(truth(f.body, trace, {**env, f.var: i}) for i in range(len(trace)))
    if t is logic.ForallEvent:
        return all(truth(f.body, trace, {**env, f.var: i}) for i in range(len(trace)))
    if t is logic.EventEq:
        return _event(f.left, trace, env) == _event(f.right, trace, env)
    if t is logic.Subterm:
        return subterm(_term(f.small, trace, env), _term(f.big, trace, env))
    if t is logic.LastEvent:
        return env[f.event] == len(trace) - 1
    raise TypeError(f)


# -- random ground formulas and traces ---------------------------------------

AGENTS = (a, b, s, INTRUDER)
MESSAGES = (a, n, k, Pair(a, n), Enc(n, k), Enc(Pair(a, n), Pk(s)), Hash(n), Pair(n, Enc(n, k)))


def random_event(rng):
    return Event(rng.choice(AGENTS), rng.choice(MESSAGES), rng.choice(AGENTS), rng.choice((SEND, RECV)))


def random_trace(rng, max_len=5):
    return tuple(random_event(rng) for _ in range(rng.randint(0, max_len)))


def random_formula(rng, depth=4, evars=()):
    leaf = depth <= 1 or rng.random() < 0.25
    if leaf:
        choice = rng.randrange(5)
        if choice == 0:
            return rng.choice((logic.TRUE, logic.FALSE))
        if choice == 1 and evars:
            return logic.LastEvent(rng.choice(evars))
        if choice in (1, 2):
            def pat():
                if evars and rng.random() < 0.6:
                    return logic.EventVar(rng.choice(evars))
                ev = random_event(rng)
                return logic.EventLit(ev.actor, ev.message, ev.peer, ev.direction)
            return logic.EventEq(pat(), pat())

        def ref():
            if evars and rng.random() < 0.5:
                return logic.Msg(rng.choice(evars))
            return rng.choice(MESSAGES + AGENTS)
        return logic.Subterm(ref(), ref())
    op = rng.randrange(6)
    sub = lambda ev=evars: random_formula(rng, depth - 1, ev)  # noqa: E731
    if op == 0:
        return logic.And(sub(), sub())
    if op == 1:
        return logic.Or(sub(), sub())
    if op == 2:
        return logic.Implies(sub(), sub())
    if op == 3:
        return logic.Not(sub())
    name = f"e{len(evars)}"
    cls = logic.ForallEvent if op == 4 else logic.ExistsEvent
    return cls(name, sub(evars + (name,)))


# -- enumerated ground derivability problems -------------------------------------

ATOMS = (a, b, k, n)


def small_terms():
    """Ground terms over four atoms up to depth 3 (depth 3 terms sampled)."""
    d1 = list(ATOMS)
    d2 = [Pair(x, y) for x in d1 for y in d1] + [Enc(x, y) for x in d1 for y in d1] \
        + [Hash(x) for x in d1] + [Pk(x) for x in d1]
    rng = random.Random(7)
    d3 = [Pair(x, y) for x in d2[:12] for y in d1] + [Enc(x, y) for x in d2 for y in (k, n, Pk(b))]
    d3 += [Enc(x, y) for x, y in ((rng.choice(d1), rng.choice(d2)) for _ in range(40))]
    d3 += [Hash(x) for x in d2[:8]] + [Pair(x, y) for x in d1 for y in d2[16:28]]
    return d1, d2, d3


def derivability_cases(count, seed=1):
    """(goal, knowledge) pairs with at most six knowledge terms of depth at most 3."""
    d1, d2, d3 = small_terms()
    pool = d1 + d2 + d3
    rng = random.Random(seed)
    cases = []
    # every goal against a few structured knowledge sets, then random ones
    structured = [(), (a,), (a, b), (Pair(a, b),), (Enc(n, k), k), (Enc(n, Pk(INTRUDER)),),
                  (Enc(Pair(a, n), k), Enc(k, b), b), (Hash(n), n)]
    for goal, kn in itertools.product(d1 + d2, structured):
        cases.append((goal, kn))
    while len(cases) < count:
        size = rng.randint(0, 6)
        kn = tuple(rng.choice(pool) for _ in range(size))
        goal = rng.choice(pool)
        if rng.random() < 0.3 and kn:
            goal = rng.choice([t for t in kn] + list(kn[0].children()) or [goal])
        cases.append((goal, kn))
    return cases[:count]
