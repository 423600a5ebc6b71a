"""Independent check of a reported violation against its scenario.

Nothing here uses the symbolic solver or the search engine: each event is
matched against its role's action pattern, every received message must be
derivable (ground, brute force) from what the intruder saw before it, and
the failed formula must be false on the ground trace while every earlier
formula on the run held.
"""
from __future__ import annotations

from . import logic
from .intruder import derivable_ground
from .model import RECV, SEND, delivery_view
from .term import Const, subterms, unify_all


def _intruder_atoms(trace) -> set:
    out = set()
    for ev in trace:
        for t in ev.terms():
            out.update(s for s in subterms(t) if type(s) is Const and s.intruder)
    return out


def replay(violation, scenario) -> list:
    """Problems found with ``violation``; an empty list means it checks out."""
    trace, steps = violation.trace, violation.steps
    if len(steps) != len(trace):
        return [f"{len(steps)} steps for {len(trace)} events"]
    problems = []
    subs = {}
    next_action = {}
    formulas = []  # (formula, position) for every annotated action on the run
    knowledge = list(scenario.initial_knowledge) + sorted(_intruder_atoms(trace), key=str)
    for k, (ev, (inst, act)) in enumerate(zip(trace, steps)):
        role = scenario.roles[inst]
        if act != next_action.get(inst, 0):
            problems.append(f"event {k}: instance {inst} skips to action {act}")
            break
        next_action[inst] = act + 1
        action = role.actions[act]
        if action.direction is not ev.direction:
            problems.append(f"event {k}: direction does not match the role")
            break
        s = unify_all([(role.identity, ev.actor), (action.message, ev.message), (action.peer, ev.peer)],
                      subs.get(inst, {}))
        if s is None:
            problems.append(f"event {k}: {ev} does not match the pattern of {role.label}")
            break
        subs[inst] = s
        if ev.direction is SEND:
            if action.formula is not None:
                formulas.append((logic.substitute(action.formula, s), k, inst, act))
            knowledge.append(ev.message)
        else:
            if not derivable_ground(ev.message, knowledge):
                problems.append(f"event {k}: intruder cannot produce {ev.message}")
                break
            if action.formula is not None:
                formulas.append((logic.substitute(action.formula, s), k + 1, inst, act))
    if problems:
        return problems
    failed = [(f, pos) for f, pos, inst, act in formulas
              if (inst, act) == (violation.instance, violation.action)]
    # a send's formula is checked before the send, so the send itself is not in the trace
    role = scenario.roles[violation.instance]
    action = role.actions[violation.action]
    if action.direction is SEND and not failed and next_action.get(violation.instance, 0) == violation.action:
        s = subs.get(violation.instance, {})
        failed = [(logic.substitute(action.formula, s), len(trace))]
    if len(failed) != 1:
        return [f"failed action {violation.instance}.{violation.action} not found on the run"]
    formula, pos = failed[0]
    if pos != violation.position:
        problems.append(f"formula position {pos} differs from reported {violation.position}")
    if logic.holds(formula, delivery_view(trace[:pos])):
        problems.append("failed formula holds on the ground trace")
    for f, p, inst, act in formulas:
        if (inst, act) == (violation.instance, violation.action):
            continue
        if p <= pos and not logic.holds(f, delivery_view(trace[:p])):
            problems.append(f"earlier formula of action {inst}.{act} fails at {p}")
    return problems


def check_trace_knowledge(trace, initial_knowledge) -> bool:
    """Every receive is derivable from initial knowledge plus earlier sends."""
    knowledge = list(initial_knowledge) + sorted(_intruder_atoms(trace), key=str)
    for ev in trace:
        if ev.direction is RECV and not derivable_ground(ev.message, knowledge):
            return False
        if ev.direction is SEND:
            knowledge.append(ev.message)
    return True
