"""Dolev-Yao intruder: knowledge analysis and symbolic derivability.

A constraint ``goal ⊢ knowledge`` asks whether the intruder can produce
``goal`` from ``knowledge``.  A sequence of constraints is reduced to
solved form (every goal a variable) in the style of Millen and Shmatikov:
goals are either unified with something the intruder already holds or
decomposed into the parts it would need to build them.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .term import (
    INTRUDER,
    Const,
    Enc,
    FreshNamer,
    Hash,
    Pair,
    Pk,
    Term,
    Var,
    apply,
    unify,
)

INTRUDER_PK = Pk(INTRUDER)


@dataclass(frozen=True)
class Constraint:
    goal: Term
    knowledge: tuple

    def apply(self, s: Mapping) -> "Constraint":
        return Constraint(apply(s, self.goal), tuple(apply(s, k) for k in self.knowledge))


@dataclass(frozen=True)
class ConstraintSeq:
    constraints: tuple = ()
    solution: dict = field(default_factory=dict)

    def extend(self, goal: Term, knowledge) -> "ConstraintSeq":
        return ConstraintSeq(self.constraints + (Constraint(goal, tuple(knowledge)),), self.solution)


@dataclass
class SolverStats:
    calls: int = 0
    steps: int = 0


# -- analysis ----------------------------------------------------------------


def _buildable(t: Term, known: set, chosen: frozenset) -> bool:
    """Can the intruder build ``t`` from ``known`` without binding anything?"""
    if t in known:
        return True
    tt = type(t)
    if tt is Var:
        return t in chosen
    if tt is Const:
        return t.intruder
    return all(_buildable(k, known, chosen) for k in t.children())


@functools.lru_cache(maxsize=65536)
def _analyze(terms: tuple, chosen: frozenset) -> tuple:
    known = {}
    todo = list(terms)
    locked = []
    while True:
        while todo:
            t = todo.pop(0)
            if t in known:
                continue
            known[t] = None
            tt = type(t)
            if tt is Pair:
                todo.extend((t.left, t.right))
            elif tt is Enc:
                if t.key == INTRUDER_PK:
                    todo.append(t.body)
                elif type(t.key) is not Pk:
                    locked.append(t)
        opened = [e for e in locked if _buildable(e.key, known, chosen)]
        if not opened:
            return tuple(known)
        locked = [e for e in locked if e not in opened]
        todo.extend(e.body for e in opened)


def analyze(knowledge: Iterable[Term], sub: Optional[Mapping] = None, chosen=frozenset()) -> tuple:
    """Closure of ``knowledge`` under pair splitting and decryption.

    Symmetric ciphertexts open when their key can be built from the closure;
    ``{m}pk(eps)`` always opens.  ``chosen`` lists variables whose value the
    intruder picked itself (they count as buildable keys).
    """
    sub = sub or {}
    return _analyze(tuple(apply(sub, k) for k in knowledge), frozenset(chosen))


# -- constraint reduction ------------------------------------------------------


def _chosen_vars(cons, s, klen) -> frozenset:
    out = []
    for c in cons:
        g = apply(s, c.goal)
        if type(g) is Var and len(c.knowledge) <= klen:
            out.append(g)
    return frozenset(out)


def _reduce(cons: tuple, s: dict, stats: SolverStats, out: list, budget: list):
    stats.steps += 1
    budget[0] -= 1
    if budget[0] < 0:
        raise SolverBudgetExceeded()
    for i, c in enumerate(cons):
        g = apply(s, c.goal)
        if type(g) is not Var:
            break
    else:
        out.append((s, cons))
        return
    rest = cons[:i] + cons[i + 1:]
    chosen = _chosen_vars(rest, s, len(c.knowledge))
    closure = analyze(c.knowledge, s, chosen)
    if g.ground and _buildable(g, set(closure), chosen):
        _reduce(rest, s, stats, out, budget)
        return
    if type(g) is not Pair:
        # the closure holds the parts of every known pair, so splitting a
        # pair goal already covers unifying it with a known pair
        for u in closure:
            if type(u) is Var:
                continue
            s2 = unify(g, u, s)
            if s2 is not None:
                _reduce(rest, s2, stats, out, budget)
    if type(g) in (Pair, Enc, Hash, Pk):
        parts = tuple(Constraint(k, c.knowledge) for k in g.children())
        _reduce(cons[:i] + parts + cons[i + 1:], s, stats, out, budget)


class SolverBudgetExceeded(RuntimeError):
    pass


def _normalize(s: dict, residual: tuple) -> tuple:
    by_var = {}
    for c in residual:
        g = apply(s, c.goal)
        prev = by_var.get(g)
        if prev is None or len(c.knowledge) < len(prev.knowledge):
            by_var[g] = Constraint(g, c.knowledge)
    return tuple(sorted(by_var.values(), key=lambda c: (len(c.knowledge), c.goal.name, c.goal.index)))


def reduce_constraints(constraints, under: Optional[Mapping] = None, stats: Optional[SolverStats] = None,
                       max_steps: int = 200_000) -> list:
    """Solved forms of ``constraints``: a list of ``(substitution, residual)``.

    ``residual`` holds the remaining ``Var ⊢ K`` constraints.  An empty list
    means the intruder cannot satisfy the sequence.
    """
    stats = stats if stats is not None else SolverStats()
    stats.calls += 1
    raw = []
    _reduce(tuple(constraints), dict(under or {}), stats, raw, [max_steps])
    seen = set()
    out = []
    for s, residual in raw:
        residual = _normalize(s, residual)
        key = (frozenset(s.items()), residual)
        if key not in seen:
            seen.add(key)
            out.append((s, residual))
    return out


def solve(cs, bind_residual: bool = False, namer: Optional[FreshNamer] = None) -> list:
    """All solutions of a constraint sequence, as substitutions.

    With ``bind_residual`` every variable left in solved form is bound to a
    fresh intruder-generated constant, giving ground solutions.
    """
    if isinstance(cs, ConstraintSeq):
        constraints, under = cs.constraints, cs.solution
    else:
        constraints, under = tuple(cs), {}
    out = []
    for s, residual in reduce_constraints(constraints, under):
        if bind_residual:
            namer = namer or FreshNamer()
            extra = {c.goal: namer.fresh(c.goal.name) for c in residual}
            s = {k: apply(extra, v) for k, v in s.items()}
            s.update(extra)
        out.append(s)
    return out


# -- ground oracle -----------------------------------------------------------


def _synthesizable(t: Term, known: set, depth_bound: int) -> bool:
    if t in known:
        return True
    if depth_bound <= 0 or type(t) in (Const, Var):
        return False
    return all(_synthesizable(k, known, depth_bound - 1) for k in t.children())


def ground_closure(knowledge: Iterable[Term], depth_bound: int = 16) -> set:
    """Everything obtainable from ground ``knowledge`` by splitting and decrypting."""
    known = set(knowledge)
    changed = True
    while changed:
        changed = False
        for t in list(known):
            new = ()
            if type(t) is Pair:
                new = (t.left, t.right)
            elif type(t) is Enc:
                if t.key == INTRUDER_PK:
                    new = (t.body,)
                elif type(t.key) is not Pk and _synthesizable(t.key, known, depth_bound):
                    new = (t.body,)
            for n in new:
                if n not in known:
                    known.add(n)
                    changed = True
    return known


def derivable_ground(t: Term, knowledge: Iterable[Term], depth_bound: int = 16) -> bool:
    """Brute-force derivability for ground terms: analyze, then synthesize."""
    knowledge = list(knowledge)
    if not t.ground or not all(k.ground for k in knowledge):
        raise ValueError("derivable_ground needs ground terms")
    return _synthesizable(t, ground_closure(knowledge, depth_bound), depth_bound)
