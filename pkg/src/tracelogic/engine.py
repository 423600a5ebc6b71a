"""Bounded exploration of scenario runs against a Dolev-Yao intruder.

A run repeatedly picks a role with actions left and performs its next
action.  Sends feed the intruder's knowledge; receives must be producible
by the intruder (checked symbolically by ``intruder.reduce_constraints``).
Attached formulas are evaluated on the trace: a send's formula before the
send is recorded, a receive's formula after.  When a formula can fail the
failing run is grounded and re-checked concretely before it is reported.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

from . import logic
from .intruder import Constraint, SolverBudgetExceeded, SolverStats, reduce_constraints
from .model import RECV, SEND, Event, ExtendedRole, Scenario, delivery_view
from .term import INTRUDER, Const, FreshNamer, Var, apply, unify_all, vars_in_order


@dataclass(frozen=True)
class SearchOptions:
    stop_at_first: bool = True
    max_states: Optional[int] = None
    time_limit: Optional[float] = None
    order: str = "input"  # "input" or "lex"
    jobs: int = 1
    max_candidates: int = 256
    eager_replies: bool = True  # a started role's pending send goes before anything else

    def __post_init__(self):
        if self.order not in ("input", "lex"):
            raise ValueError(f"unknown branch order {self.order!r}")


@dataclass(frozen=True)
class Obligation:
    formula: object
    position: int  # trace length the formula was evaluated on
    instance: int
    action: int


@dataclass(frozen=True)
class SearchState:
    roles: tuple  # instantiated ExtendedRoles, one per scenario instance
    pcs: tuple  # index of the next action of each role
    substitution: dict
    knowledge: tuple
    constraints: tuple  # solved-form Var ⊢ K constraints
    trace: tuple  # events, substitution not yet applied
    steps: tuple = ()  # (instance, action) that produced each event
    obligations: tuple = ()

    def remaining(self, i: int) -> tuple:
        return self.roles[i].actions[self.pcs[i]:]

    def is_final(self) -> bool:
        return all(pc == len(r.actions) for r, pc in zip(self.roles, self.pcs))

    def current_trace(self) -> tuple:
        return tuple(e.apply(self.substitution) for e in self.trace)


@dataclass(frozen=True)
class Violation:
    trace: tuple  # ground events
    formula: object  # the attached formula, instantiated and ground where the run fixed it
    role: str
    instance: int
    action: int
    bindings: dict
    steps: tuple
    position: int

    @property
    def formula_name(self) -> str:
        return logic.label_of(self.formula)

    def key(self) -> tuple:
        """Identity modulo renaming of intruder-generated atoms."""
        names = {}
        for ev in self.trace:
            for t in ev.terms():
                for s in _atoms(t):
                    if s.intruder and s not in names:
                        names[s] = Const(f"#{len(names) + 1}", intruder=True)
        canon = tuple(ev.apply(names) for ev in self.trace)
        return (len(self.trace), tuple(str(e) for e in canon), self.formula_name, self.instance, self.action)


def _atoms(t):
    if type(t) is Const:
        yield t
    for k in t.children():
        yield from _atoms(k)


@dataclass
class SearchStats:
    states: int = 0
    solver_calls: int = 0
    completed_runs: int = 0
    wall_time: float = 0.0


@dataclass
class SearchResult:
    violations: list
    stats: SearchStats
    status: str  # "exhausted" or "capped"
    scenario: Scenario = None

    @property
    def exhausted(self) -> bool:
        return self.status == "exhausted"


class _Capped(Exception):
    pass


class _Context:
    def __init__(self, scenario: Scenario, options: SearchOptions):
        self.scenario = scenario
        self.options = options
        self.solver = SolverStats()
        self.states = 0
        self.completed = 0
        self.deadline = None if options.time_limit is None else time.monotonic() + options.time_limit
        self.public = frozenset(scenario.initial_knowledge)
        self.agents = _agent_names(scenario)
        self.twins = _twin_predecessors(scenario.roles)
        self.found = {}

    def tick(self):
        self.states += 1
        if self.options.max_states is not None and self.states > self.options.max_states:
            raise _Capped()
        if self.deadline is not None and self.states % 256 == 0 and time.monotonic() > self.deadline:
            raise _Capped()

    def reduce(self, constraints, under):
        try:
            return reduce_constraints(constraints, under, self.solver)
        except SolverBudgetExceeded:
            raise _Capped() from None


def _agent_names(scenario) -> tuple:
    out = [INTRUDER]
    for r in scenario.roles:
        for t in [r.identity] + [a.peer for a in r.actions]:
            if type(t) is Const and t not in out:
                out.append(t)
    return tuple(out)


def _shape(role: ExtendedRole):
    return role.apply({v: Var(v.name, 0) for v in role.variables()})


def _twin_predecessors(roles) -> tuple:
    """For each instance, the previous instance of an identical role (or -1)."""
    out = []
    last = {}
    for i, r in enumerate(roles):
        key = repr(_shape(r))
        out.append(last.get(key, -1))
        last[key] = i
    return tuple(out)


def initial_state(scenario: Scenario) -> SearchState:
    return SearchState(
        roles=scenario.roles,
        pcs=tuple(0 for _ in scenario.roles),
        substitution={},
        knowledge=scenario.initial_knowledge,
        constraints=(),
        trace=(),
    )


def _enabled(state: SearchState, ctx: _Context) -> list:
    idx = [
        i for i, r in enumerate(state.roles)
        if state.pcs[i] < len(r.actions) and (ctx.twins[i] < 0 or state.pcs[ctx.twins[i]] > 0)
    ]
    if ctx.options.order == "lex":
        idx.sort(key=lambda i: (state.roles[i].label, i))
    if ctx.options.eager_replies:
        sends = [i for i in idx if state.pcs[i] > 0 and state.roles[i].actions[state.pcs[i]].direction is SEND]
        if sends:
            return sends[:1]
    return idx


def _trace_vars(state: SearchState, s) -> set:
    return set(vars_in_order(t for e in state.trace for t in e.apply(s).terms()))


def _check_formula(state, formula, s, cons, trace, inst, act, ctx):
    """Continuations and confirmed violations for ``formula`` at this point.

    ``trace`` is the trace the formula is evaluated on.  Returns
    ``(continuations, violations)`` where each continuation is a
    ``(substitution, constraints)`` pair under which the formula holds.
    """
    if formula is None or isinstance(logic.unlabel(formula), logic.TrueF):
        return [(s, cons)], []
    view = delivery_view(trace)
    tvars = set(vars_in_order(t for e in trace for t in e.apply(s).terms()))
    witnesses = logic.evaluate(formula, view, s)
    conts = []
    generic = False
    for w in witnesses:
        if all(apply(w, v) == apply(s, v) for v in tvars):
            generic = True
            conts.append((w, cons))
        else:
            conts.extend(ctx.reduce(cons, w))
    if not generic:
        frozen = {v: Const(f"?{v.name}.{v.index}", intruder=True) for v in tvars}
        s_frozen = {k: apply(frozen, v) for k, v in s.items()}
        s_frozen.update({v: c for v, c in frozen.items() if v not in s_frozen})
        if logic.holds(formula, view, s_frozen):
            conts.append((s, cons))

    violations = []
    for cand in _violation_candidates(formula, view, s, tvars, ctx):
        for s3, cons3 in ctx.reduce(cons, cand):
            v = _confirm(state, formula, s3, trace, inst, act, ctx)
            if v is not None:
                violations.append(v)
                break
        if violations and ctx.options.stop_at_first:
            break
    return conts, violations


def _violation_candidates(formula, view, s, tvars, ctx):
    """Bindings under which ``formula`` might fail, to be confirmed on a ground run.

    Two sources: witnesses of the negated formula, as long as they only pin
    trace variables to honest secret atoms (the intruder replaying something
    it learned), and every choice of agent name for variables that stand in an
    agent position of the formula.  Without agent variables the symbolic run
    itself is the only other candidate.
    """
    seen = set()

    def fresh(c):
        key = frozenset(c.items())
        if key in seen:
            return False
        seen.add(key)
        return True

    for n in logic.evaluate(logic.negate(formula), view, s):
        if all(_honest_choice(apply(n, v), apply(s, v), ctx) for v in tvars) and fresh(n):
            yield n
    avars = [v for v in logic.agent_vars(logic.substitute(formula, s)) if v in tvars]
    if not avars:
        if fresh(s):
            yield s
        return
    for combo in itertools.islice(itertools.product(ctx.agents, repeat=len(avars)), ctx.options.max_candidates):
        cand = unify_all(zip(avars, combo), s)
        if cand is not None and fresh(cand):
            yield cand


def _honest_choice(new, old, ctx) -> bool:
    if new == old:
        return True
    return type(new) is Const and not new.intruder and new not in ctx.public


def _ground_bindings(trace, s) -> dict:
    namer = FreshNamer()
    out = {}
    for v in vars_in_order(t for e in trace for t in e.apply(s).terms()):
        out[v] = namer.fresh(v.name)
    return out


def _confirm(state, formula, s, trace, inst, act, ctx) -> Optional[Violation]:
    g = _ground_bindings(trace, s)
    gs = {k: apply(g, v) for k, v in s.items()}
    gs.update({v: c for v, c in g.items() if v not in gs})
    ground_trace = tuple(e.apply(gs) for e in trace)
    for ob in state.obligations:
        if not logic.holds(ob.formula, delivery_view(ground_trace[:ob.position]), gs):
            return None
    if logic.holds(formula, delivery_view(ground_trace), gs):
        return None
    role = state.roles[inst]
    steps = state.steps + ((inst, act),) if len(trace) > len(state.trace) else state.steps
    bindings = {v: apply(gs, v) for v in role.variables()}
    bindings = {v: t for v, t in bindings.items() if t != v}
    return Violation(
        trace=ground_trace,
        formula=logic.substitute(formula, gs),
        role=role.label,
        instance=inst,
        action=act,
        bindings=bindings,
        steps=steps,
        position=len(trace),
    )


def expand(state: SearchState, ctx: _Context):
    """Successor states and confirmed violations of one step."""
    succs = []
    violations = []
    for i in _enabled(state, ctx):
        role = state.roles[i]
        a = state.pcs[i]
        act = role.actions[a]
        pcs = state.pcs[:i] + (a + 1,) + state.pcs[i + 1:]
        ob_pos = len(state.trace)
        if act.direction is SEND:
            conts, viols = _check_formula(state, act.formula, state.substitution, state.constraints,
                                          state.trace, i, a, ctx)
            violations.extend(viols)
            ev = Event(role.identity, act.message, act.peer, SEND)
            for s, cons in conts:
                succs.append(SearchState(
                    roles=state.roles, pcs=pcs, substitution=s,
                    knowledge=state.knowledge + (act.message,), constraints=cons,
                    trace=state.trace + (ev,), steps=state.steps + ((i, a),),
                    obligations=state.obligations + _ob(act.formula, ob_pos, i, a),
                ))
        else:
            goal = Constraint(act.message, state.knowledge)
            ev = Event(role.identity, act.message, act.peer, RECV)
            trace = state.trace + (ev,)
            for s, cons in ctx.reduce(state.constraints + (goal,), state.substitution):
                conts, viols = _check_formula(state, act.formula, s, cons, trace, i, a, ctx)
                violations.extend(viols)
                for s2, cons2 in conts:
                    succs.append(SearchState(
                        roles=state.roles, pcs=pcs, substitution=s2,
                        knowledge=state.knowledge, constraints=cons2,
                        trace=trace, steps=state.steps + ((i, a),),
                        obligations=state.obligations + _ob(act.formula, ob_pos + 1, i, a),
                    ))
    return _dedup_states(succs), violations


def _ob(formula, pos, i, a):
    if formula is None or isinstance(logic.unlabel(formula), logic.TrueF):
        return ()
    return (Obligation(formula, pos, i, a),)


def _dedup_states(states):
    seen = set()
    out = []
    for st in states:
        key = (st.pcs, frozenset(st.substitution.items()), st.constraints, st.steps)
        if key not in seen:
            seen.add(key)
            out.append(st)
    return out


def step(state: SearchState, scenario: Scenario, options: SearchOptions = SearchOptions()) -> list:
    """Every successor of ``state``; runs whose formula fails are not successors."""
    return expand(state, _Context(scenario, options))[0]


def detect_violation(state: SearchState, instance: int, action: int, scenario: Scenario,
                     options: SearchOptions = SearchOptions(stop_at_first=False)) -> list:
    """Confirmed violations of the formula on ``action`` evaluated at ``state``.

    ``state`` is the state right after the action was taken.
    """
    ctx = _Context(scenario, options)
    act = state.roles[instance].actions[action]
    trace = state.trace if act.direction is RECV else state.trace[:-1]
    base = SearchState(state.roles, state.pcs, state.substitution, state.knowledge, state.constraints,
                       state.trace[:-1], state.steps[:-1], tuple(o for o in state.obligations
                                                                 if (o.instance, o.action) != (instance, action)))
    _, viols = _check_formula(base, act.formula, state.substitution, state.constraints, trace,
                              instance, action, ctx)
    return viols


def _dfs(root: SearchState, ctx: _Context, depth_limit: Optional[int]):
    stack = [root]
    while stack:
        state = stack.pop()
        ctx.tick()
        if state.is_final():
            ctx.completed += 1
            continue
        if depth_limit is not None and len(state.trace) >= depth_limit:
            continue
        succs, viols = expand(state, ctx)
        for v in viols:
            ctx.found.setdefault(repr(v.key()), v)
        if viols and ctx.options.stop_at_first:
            return
        stack.extend(reversed(succs))


def search(scenario: Scenario, options: SearchOptions = SearchOptions()) -> SearchResult:
    """Explore every run of ``scenario`` and return the confirmed violations."""
    t0 = time.monotonic()
    ctx = _Context(scenario, options)
    root = initial_state(scenario)
    total = sum(len(r.actions) for r in scenario.roles)
    status = "exhausted"
    try:
        if options.stop_at_first:
            for limit in range(1, total + 1):
                ctx.completed = 0
                _dfs(root, ctx, limit)
                if ctx.found:
                    break
        elif options.jobs > 1:
            _parallel(root, ctx)
        else:
            _dfs(root, ctx, None)
    except _Capped:
        status = "capped"
    violations = sorted(ctx.found.values(), key=lambda v: repr(v.key()))
    if options.stop_at_first:
        violations = violations[:1]
    stats = SearchStats(states=ctx.states, solver_calls=ctx.solver.calls, completed_runs=ctx.completed,
                        wall_time=time.monotonic() - t0)
    return SearchResult(violations, stats, status, scenario)


def _subtree(args):
    scenario, options, state = args
    ctx = _Context(scenario, options)
    status = "exhausted"
    try:
        _dfs(state, ctx, None)
    except _Capped:
        status = "capped"
    return ctx.found, ctx.states, ctx.solver.calls, ctx.completed, status


def _parallel(root: SearchState, ctx: _Context):
    from concurrent.futures import ProcessPoolExecutor

    ctx.tick()
    succs, viols = expand(root, ctx)
    for v in viols:
        ctx.found.setdefault(repr(v.key()), v)
    capped = False
    with ProcessPoolExecutor(max_workers=ctx.options.jobs) as pool:
        for found, states, calls, completed, status in pool.map(
                _subtree, [(ctx.scenario, ctx.options, s) for s in succs]):
            for k, v in found.items():
                ctx.found.setdefault(k, v)
            ctx.states += states
            ctx.solver.calls += calls
            ctx.completed += completed
            capped |= status == "capped"
    if capped:
        raise _Capped()
