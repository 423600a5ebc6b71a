"""Protocol roles, events, traces and system scenarios."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .term import INTRUDER, Const, Pk, Term, Var, apply, is_atomic, vars_in_order


class Direction(enum.Enum):
    SEND = "->"
    RECV = "<-"

    @property
    def symbol(self) -> str:
        return "▷" if self is Direction.SEND else "◁"


SEND = Direction.SEND
RECV = Direction.RECV


@dataclass(frozen=True)
class Event:
    """``<actor : message dir peer>``.

    For a send, ``peer`` is the intended destination; for a receive it is
    the apparent sender.  Neither is checked against actual delivery.
    """

    actor: Term
    message: Term
    peer: Term
    direction: Direction

    def __post_init__(self):
        if not (is_atomic(self.actor) and is_atomic(self.peer)):
            raise ValueError(f"event actor and peer must be atomic: {self}")

    def apply(self, s: Mapping) -> "Event":
        if not s:
            return self
        return Event(apply(s, self.actor), apply(s, self.message), apply(s, self.peer), self.direction)

    def terms(self):
        return (self.actor, self.message, self.peer)

    def __str__(self):
        from .term import show

        return f"<{show(self.actor)} : {show(self.message)} {self.direction.symbol} {show(self.peer)}>"


Trace = tuple  # tuple[Event, ...]


def delivery_view(trace) -> tuple:
    """The trace as seen by attached formulas.

    Every message an honest agent receives was put on the wire by the
    intruder, so each receive ``<b : m <- y>`` is preceded by the intruder's
    own send ``<eps : m -> b>``.  Honest events are unchanged.
    """
    out = []
    for ev in trace:
        if ev.direction is RECV:
            out.append(Event(INTRUDER, ev.message, ev.actor, SEND))
        out.append(ev)
    return tuple(out)


@dataclass(frozen=True)
class Action:
    message: Term
    peer: Term
    direction: Direction
    formula: Optional[object] = None  # logic.Formula; None reads as `true`
    label: str = ""

    def __post_init__(self):
        if not is_atomic(self.peer):
            raise ValueError(f"action peer must be atomic, got {self.peer!r}")


@dataclass(frozen=True)
class ExtendedRole:
    identity: Term
    actions: tuple
    label: str = ""
    params: tuple = ()  # template parameter variables, in declaration order

    def __post_init__(self):
        if not is_atomic(self.identity):
            raise ValueError(f"role identity must be atomic, got {self.identity!r}")
        object.__setattr__(self, "actions", tuple(self.actions))

    def variables(self) -> list:
        from .logic import formula_vars

        terms = [self.identity]
        for act in self.actions:
            terms.extend((act.message, act.peer))
        out = vars_in_order(terms)
        for act in self.actions:
            if act.formula is not None:
                for v in formula_vars(act.formula):
                    if v not in out:
                        out.append(v)
        return out

    def apply(self, s: Mapping) -> "ExtendedRole":
        from .logic import substitute

        acts = tuple(
            replace(
                a,
                message=apply(s, a.message),
                peer=apply(s, a.peer),
                formula=None if a.formula is None else substitute(a.formula, s),
            )
            for a in self.actions
        )
        return replace(self, identity=apply(s, self.identity), actions=acts)


def role_is_finished(role: ExtendedRole) -> bool:
    return not role.actions


def instantiate_role(template: ExtendedRole, args: Mapping, index: int) -> ExtendedRole:
    """Copy ``template`` with ``args`` applied and every other variable renamed.

    ``args`` maps template variable names to terms.  Unbound variables get
    ``index`` so that separate instances never share variables.
    """
    tvars = {v.name: v for v in template.variables()}
    unknown = set(args) - set(tvars)
    if unknown:
        raise ValueError(f"role {template.label!r} has no variable(s) {sorted(unknown)}")
    positional = {template.identity} | {a.peer for a in template.actions}
    s = {}
    for name, v in tvars.items():
        if name in args:
            val = args[name]
            if v in positional and not is_atomic(val):
                raise ValueError(f"{name} is an agent position and must be atomic, got {val!r}")
            s[v] = val
        else:
            s[v] = Var(v.name, index)
    return template.apply(s)


@dataclass(frozen=True)
class Scenario:
    roles: tuple
    initial_knowledge: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "initial_knowledge", tuple(self.initial_knowledge))
        for t in self.initial_knowledge:
            if not t.ground:
                raise ValueError(f"initial knowledge must be ground, got {t!r}")


def default_knowledge(roles, extra=()) -> tuple:
    """Intruder's starting knowledge: itself, every ground agent name, and their public keys."""
    agents = [INTRUDER]
    for r in roles:
        for t in [r.identity] + [a.peer for a in r.actions]:
            if type(t) is Const and t not in agents:
                agents.append(t)
    out = []
    for a in agents:
        out.append(a)
    for a in agents:
        out.append(Pk(a))
    for t in extra:
        if t not in out:
            out.append(t)
    return tuple(out)
