"""Trace-logic formulas and their evaluation over finite traces.

``evaluate`` returns witnesses rather than a boolean: the list of
substitutions (each extending the input one) under which the formula holds.
An empty list means the formula is false on the trace.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .model import Direction, Event
from .term import Pair, Term, Var, apply, is_subterm, show, subterms, unify, unify_all, variables


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class ForallEvent(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsEvent(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsTerm(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class EventVar:
    name: str


@dataclass(frozen=True)
class EventLit:
    actor: Term
    message: Term
    peer: Term
    direction: Direction


EventPattern = Union[EventVar, EventLit]


@dataclass(frozen=True)
class Msg:
    """``msg(e)``: the message carried by a bound event."""

    event: str


TermRef = Union[Term, Msg]


@dataclass(frozen=True)
class EventEq(Formula):
    left: EventPattern
    right: EventPattern


@dataclass(frozen=True)
class Subterm(Formula):
    small: TermRef
    big: TermRef


@dataclass(frozen=True)
class LastEvent(Formula):
    event: str


@dataclass(frozen=True)
class Labeled(Formula):
    """A named formula.  Evaluates exactly like ``body``."""

    name: str
    body: Formula


class UnboundEventVariable(ValueError):
    pass


# -- evaluation ------------------------------------------------------------

_fresh_ids = itertools.count(1)


def evaluate(f: Formula, trace, under: Optional[Mapping] = None) -> list:
    """All witnesses under which ``f`` holds on ``trace``, in a normalized order."""
    under = dict(under) if under else {}
    return _dedup(_eval(f, tuple(trace), under, {}))


def holds(f: Formula, trace, under: Optional[Mapping] = None) -> bool:
    return bool(evaluate(f, trace, under))


def _dedup(witnesses):
    seen = set()
    out = []
    for w in witnesses:
        key = frozenset(w.items())
        if key not in seen:
            seen.add(key)
            out.append(w)
    return out


def _event(env, name) -> int:
    try:
        return env[name]
    except KeyError:
        raise UnboundEventVariable(f"event variable {name!r} is not bound") from None


def _resolve_event(p, trace, env) -> Event:
    if isinstance(p, EventVar):
        return trace[_event(env, p.name)]
    return p


def _resolve_term(r, trace, env, s) -> Term:
    if isinstance(r, Msg):
        return apply(s, trace[_event(env, r.event)].message)
    return apply(s, r)


def _eval(f, trace, s, env) -> list:
    t = type(f)
    if t is TrueF:
        return [s]
    if t is FalseF:
        return []
    if t is Labeled:
        return _eval(f.body, trace, s, env)
    if t is And:
        out = []
        for w in _eval(f.left, trace, s, env):
            out.extend(_eval(f.right, trace, w, env))
        return _dedup(out)
    if t is Or:
        return _dedup(_eval(f.left, trace, s, env) + _eval(f.right, trace, s, env))
    if t is Implies:
        if not _eval(f.left, trace, s, env):
            return [s]
        return _eval(And(f.left, f.right), trace, s, env)
    if t is Not:
        return [] if _eval(f.body, trace, s, env) else [s]
    if t is ExistsEvent:
        out = []
        for i in range(len(trace)):
            out.extend(_eval(f.body, trace, s, {**env, f.var: i}))
        return _dedup(out)
    if t is ForallEvent:
        for i in range(len(trace)):
            if not _eval(f.body, trace, s, {**env, f.var: i}):
                return []
        return [s]
    if t is ExistsTerm:
        local = Var(f.var.name, -next(_fresh_ids))
        body = substitute(f.body, {f.var: local})
        out = []
        for w in _eval(body, trace, s, env):
            w = {k: v for k, v in w.items() if k != local}
            out.append(w)
        return _dedup(out)
    if t is EventEq:
        a = _resolve_event(f.left, trace, env)
        b = _resolve_event(f.right, trace, env)
        if a.direction is not b.direction:
            return []
        w = unify_all(zip((a.actor, a.message, a.peer), (b.actor, b.message, b.peer)), s)
        return [] if w is None else [w]
    if t is Subterm:
        small = _resolve_term(f.small, trace, env, s)
        big = _resolve_term(f.big, trace, env, s)
        if small.ground and big.ground:
            return [s] if is_subterm(small, big) else []
        out = []
        seen = set()
        for sub in subterms(big):
            if sub in seen:
                continue
            seen.add(sub)
            w = unify(small, sub, s)
            if w is not None:
                out.append(w)
        return _dedup(out)
    if t is LastEvent:
        return [s] if _event(env, f.event) == len(trace) - 1 else []
    raise TypeError(f"not a formula: {f!r}")


# -- syntactic utilities -----------------------------------------------------


def substitute(f: Formula, s: Mapping) -> Formula:
    """Apply a term substitution to every term inside ``f`` (binders respected)."""
    if not s:
        return f
    t = type(f)
    if t in (TrueF, FalseF, LastEvent):
        return f
    if t is Labeled:
        return Labeled(f.name, substitute(f.body, s))
    if t in (And, Or, Implies):
        return t(substitute(f.left, s), substitute(f.right, s))
    if t is Not:
        return Not(substitute(f.body, s))
    if t in (ForallEvent, ExistsEvent):
        return t(f.var, substitute(f.body, s))
    if t is ExistsTerm:
        inner = {k: v for k, v in s.items() if k != f.var}
        return ExistsTerm(f.var, substitute(f.body, inner))
    if t is EventEq:
        return EventEq(_sub_pattern(f.left, s), _sub_pattern(f.right, s))
    if t is Subterm:
        return Subterm(_sub_ref(f.small, s), _sub_ref(f.big, s))
    raise TypeError(f"not a formula: {f!r}")


def _sub_pattern(p, s):
    if isinstance(p, EventVar):
        return p
    return EventLit(apply(s, p.actor), apply(s, p.message), apply(s, p.peer), p.direction)


def _sub_ref(r, s):
    return r if isinstance(r, Msg) else apply(s, r)


def _pattern_terms(p):
    return () if isinstance(p, EventVar) else (p.actor, p.message, p.peer)


def free_vars(f: Formula) -> set:
    """Term variables of ``f`` not bound by an ``exists X:`` quantifier."""
    t = type(f)
    if t in (TrueF, FalseF, LastEvent):
        return set()
    if t is Labeled:
        return free_vars(f.body)
    if t in (And, Or, Implies):
        return free_vars(f.left) | free_vars(f.right)
    if t in (Not,):
        return free_vars(f.body)
    if t in (ForallEvent, ExistsEvent):
        return free_vars(f.body)
    if t is ExistsTerm:
        return free_vars(f.body) - {f.var}
    if t is EventEq:
        out = set()
        for term in _pattern_terms(f.left) + _pattern_terms(f.right):
            out |= variables(term)
        return out
    if t is Subterm:
        out = set()
        for r in (f.small, f.big):
            if not isinstance(r, Msg):
                out |= variables(r)
        return out
    raise TypeError(f"not a formula: {f!r}")


def agent_vars(f: Formula) -> list:
    """Free variables standing as actor or peer of an event pattern, sorted."""
    out = set()

    def walk(g, bound):
        t = type(g)
        if t in (And, Or, Implies):
            walk(g.left, bound)
            walk(g.right, bound)
        elif t in (Not, Labeled, ForallEvent, ExistsEvent):
            walk(g.body, bound)
        elif t is ExistsTerm:
            walk(g.body, bound | {g.var})
        elif t is EventEq:
            for p in (g.left, g.right):
                if isinstance(p, EventLit):
                    out.update(v for v in (p.actor, p.peer) if type(v) is Var and v not in bound)

    walk(f, frozenset())
    return sorted(out, key=lambda v: (v.name, v.index))


def formula_vars(f: Formula) -> list:
    """Free variables in a deterministic order (by name, then index)."""
    return sorted(free_vars(f), key=lambda v: (v.name, v.index))


def check_bound(f: Formula, bound=frozenset()) -> None:
    """Raise ``UnboundEventVariable`` if an event variable is used unbound."""
    t = type(f)
    if t in (TrueF, FalseF):
        return
    if t is Labeled:
        return check_bound(f.body, bound)
    if t in (And, Or, Implies):
        check_bound(f.left, bound)
        check_bound(f.right, bound)
    elif t is Not:
        check_bound(f.body, bound)
    elif t in (ForallEvent, ExistsEvent):
        check_bound(f.body, bound | {f.var})
    elif t is ExistsTerm:
        check_bound(f.body, bound)
    elif t is LastEvent:
        if f.event not in bound:
            raise UnboundEventVariable(f"event variable {f.event!r} is not bound")
    elif t is EventEq:
        for p in (f.left, f.right):
            if isinstance(p, EventVar) and p.name not in bound:
                raise UnboundEventVariable(f"event variable {p.name!r} is not bound")
    elif t is Subterm:
        for r in (f.small, f.big):
            if isinstance(r, Msg) and r.event not in bound:
                raise UnboundEventVariable(f"event variable {r.event!r} is not bound")


def negate(f: Formula) -> Formula:
    """Negation pushed inward as far as the logic allows (negation normal form)."""
    t = type(f)
    if t is TrueF:
        return FALSE
    if t is FalseF:
        return TRUE
    if t is Labeled:
        return negate(f.body)
    if t is And:
        return Or(negate(f.left), negate(f.right))
    if t is Or:
        return And(negate(f.left), negate(f.right))
    if t is Implies:
        return And(nnf(f.left), negate(f.right))
    if t is Not:
        return nnf(f.body)
    if t is ForallEvent:
        return ExistsEvent(f.var, negate(f.body))
    if t is ExistsEvent:
        return ForallEvent(f.var, negate(f.body))
    return Not(nnf(f))


def nnf(f: Formula) -> Formula:
    t = type(f)
    if t is Labeled:
        return nnf(f.body)
    if t in (And, Or):
        return t(nnf(f.left), nnf(f.right))
    if t is Implies:
        return Or(negate(f.left), nnf(f.right))
    if t is Not:
        return negate(f.body)
    if t in (ForallEvent, ExistsEvent, ExistsTerm):
        return t(f.var, nnf(f.body))
    return f


def label_of(f: Optional[Formula]) -> str:
    if f is None:
        return "true"
    if isinstance(f, Labeled):
        return f.name
    return show_formula(f)


def unlabel(f: Formula) -> Formula:
    while isinstance(f, Labeled):
        f = f.body
    return f


# -- printing ----------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}


def _show_pattern(p) -> str:
    if isinstance(p, EventVar):
        return p.name
    return f"<{show(p.actor)} : {show(p.message)} {p.direction.value} {show(p.peer)}>"


def _show_ref(r) -> str:
    if isinstance(r, Msg):
        return f"msg({r.event})"
    return f"({show(r)})" if type(r) is Pair else show(r)


def show_formula(f: Formula, prec: int = 0) -> str:
    t = type(f)
    if t is TrueF:
        return "true"
    if t is FalseF:
        return "false"
    if t is Labeled:
        return show_formula(f.body, prec)
    if t in _PREC:
        p = _PREC[t]
        op = {And: "and", Or: "or", Implies: "implies"}[t]
        if t is Implies:
            text = f"{show_formula(f.left, p + 1)} {op} {show_formula(f.right, p)}"
        else:
            text = f"{show_formula(f.left, p)} {op} {show_formula(f.right, p + 1)}"
        return f"({text})" if p < prec else text
    if t is Not:
        return f"not {show_formula(f.body, 4)}"
    if t in (ForallEvent, ExistsEvent):
        q = "forall" if t is ForallEvent else "exists"
        text = f"{q} {f.var} in tr : {show_formula(f.body, 0)}"
        return f"({text})" if prec > 0 else text
    if t is ExistsTerm:
        text = f"exists {show(f.var)} : {show_formula(f.body, 0)}"
        return f"({text})" if prec > 0 else text
    if t is EventEq:
        return f"{_show_pattern(f.left)} = {_show_pattern(f.right)}"
    if t is Subterm:
        return f"subterm({_show_ref(f.small)}, {_show_ref(f.big)})"
    if t is LastEvent:
        return f"last_event({f.event})"
    raise TypeError(f"not a formula: {f!r}")
