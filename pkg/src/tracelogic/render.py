"""Alice&Bob rendering of traces and JSON encoding of reports."""
from __future__ import annotations

from .logic import show_formula
from .model import RECV, SEND, Event
from .term import INTRUDER, Const, Enc, Hash, Pair, Pk, Term, Var, show


def _masked(agent: Term) -> str:
    return "ε" if agent == INTRUDER else f"ε({show(agent)})"


def _delivered(send: Event, recv: Event) -> bool:
    return (recv.direction is RECV and recv.actor == send.peer and recv.peer == send.actor
            and recv.message == send.message)


def render_trace(trace) -> list:
    """One line per message; a send picked up directly by its intended peer is one line."""
    trace = getattr(trace, "trace", trace)
    lines = []
    i = 0
    while i < len(trace):
        ev = trace[i]
        msg = show(ev.message)
        if ev.direction is SEND:
            if i + 1 < len(trace) and _delivered(ev, trace[i + 1]):
                lines.append(f"{show(ev.actor)} → {show(ev.peer)} : {msg}")
                i += 2
                continue
            lines.append(f"{show(ev.actor)} → {_masked(ev.peer)} : {msg}")
        else:
            lines.append(f"{_masked(ev.peer)} → {show(ev.actor)} : {msg}")
        i += 1
    return lines


def term_to_json(t: Term):
    tt = type(t)
    if tt is Const:
        out = {"const": t.name}
        if t.intruder:
            out["generated"] = True
        return out
    if tt is Var:
        return {"var": t.name, "index": t.index}
    if tt is Pair:
        return {"pair": [term_to_json(t.left), term_to_json(t.right)]}
    if tt is Enc:
        return {"enc": {"body": term_to_json(t.body), "key": term_to_json(t.key)}}
    if tt is Hash:
        return {"hash": term_to_json(t.body)}
    if tt is Pk:
        return {"pk": term_to_json(t.body)}
    raise TypeError(f"not a term: {t!r}")


def event_to_json(ev: Event) -> dict:
    return {
        "actor": term_to_json(ev.actor),
        "direction": "send" if ev.direction is SEND else "recv",
        "peer": term_to_json(ev.peer),
        "message": term_to_json(ev.message),
    }


def violation_to_json(v) -> dict:
    return {
        "formula": v.formula_name,
        "formula_text": show_formula(v.formula),
        "role": v.role,
        "instance": v.instance,
        "action": v.action,
        "position": v.position,
        "bindings": {show(k): show(t) for k, t in sorted(v.bindings.items(), key=lambda kv: show(kv[0]))},
        "trace": [event_to_json(e) for e in v.trace],
        "rendered": render_trace(v.trace),
    }


def scenario_summary(scenario) -> dict:
    return {
        "roles": [
            {"label": r.label, "identity": show(r.identity), "actions": len(r.actions)}
            for r in scenario.roles
        ],
        "initial_knowledge": [show(t) for t in scenario.initial_knowledge],
    }


def report(result, name: str, options: dict) -> dict:
    """Schema-stable report.  Wall time is left out so reruns are byte-identical."""
    return {
        "scenario": dict(name=name, **scenario_summary(result.scenario)),
        "options": options,
        "violations": [violation_to_json(v) for v in result.violations],
        "stats": {
            "states": result.stats.states,
            "solver_calls": result.stats.solver_calls,
            "completed_runs": result.stats.completed_runs,
        },
        "status": result.status,
    }


def format_text(result, name: str, quiet: bool = False) -> str:
    lines = []
    for n, v in enumerate(result.violations, start=1):
        lines.append(f"violation {n}: formula {v.formula_name or '<unnamed>'} of {v.role} "
                     f"(instance {v.instance}, action {v.action}) fails after {v.position} events")
        if not quiet:
            lines.append(f"  formula: {show_formula(v.formula)}")
            if v.bindings:
                lines.append("  bindings: " + ", ".join(
                    f"{show(k)} = {show(t)}" for k, t in sorted(v.bindings.items(), key=lambda kv: show(kv[0]))))
            lines.extend(f"  {line}" for line in render_trace(v.trace))
    s = result.stats
    if result.status == "capped":
        verdict = "search capped before exhaustion; results are partial"
    elif result.violations:
        verdict = f"{len(result.violations)} violation(s) found"
    else:
        verdict = "no attack found (bounded to this scenario)"
    lines.append(f"{name}: {verdict}")
    if not quiet:
        lines.append(f"states {s.states}, solver calls {s.solver_calls}, completed runs {s.completed_runs}, "
                     f"{s.wall_time:.2f}s")
    return "\n".join(lines)
