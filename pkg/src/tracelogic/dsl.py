"""Text format (``.tlp``) for roles, attached formulas and scenarios.

Example::

    role responder(A, Na) as B {
        recv pk(Na) from A
    }
    scenario {
        responder(B = b)
    }

Identifiers starting with an uppercase letter are variables, lowercase ones
are constants; ``eps`` (or ``ε``) is the intruder.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import logic
from .model import RECV, SEND, Action, ExtendedRole, Scenario, default_knowledge, instantiate_role
from .term import INTRUDER, Const, Enc, Hash, Pair, Pk, Term, Var, flatten_pair, show

KEYWORDS = {
    "role", "as", "send", "to", "recv", "from", "assert", "scenario", "knowledge", "options",
    "true", "false", "and", "or", "implies", "not", "forall", "exists", "in", "tr",
    "subterm", "last_event",
}


class SpecError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "number", "punct", "eof"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<ident>[A-Za-z_ε][A-Za-z0-9_']*)|(?P<number>[0-9]+)"
    r"|(?P<punct>->|<-|[{}()<>,:;=])"
)


def tokenize(text: str) -> list:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SpecError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "number", "punct"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- spec data ---------------------------------------------------------------


@dataclass(frozen=True)
class RoleTemplate:
    name: str
    params: tuple  # parameter names, declaration order
    role: ExtendedRole


@dataclass(frozen=True)
class Instantiation:
    template: str
    args: tuple  # ((name, Term), ...)


@dataclass(frozen=True)
class SpecFile:
    templates: tuple = ()
    instances: tuple = ()
    knowledge: tuple = ()
    options: tuple = ()  # ((key, value), ...)
    has_scenario: bool = True

    def template(self, name: str) -> RoleTemplate:
        for t in self.templates:
            if t.name == name:
                return t
        raise KeyError(name)

    def scenario(self) -> Scenario:
        roles = []
        for i, inst in enumerate(self.instances, start=1):
            roles.append(instantiate_role(self.template(inst.template).role, dict(inst.args), i))
        return Scenario(tuple(roles), default_knowledge(roles, self.knowledge))


# -- parser --------------------------------------------------------------------


def _is_var_name(name: str) -> bool:
    return name[0].isupper()


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise SpecError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    # top level
    def parse_file(self) -> SpecFile:
        templates, names = [], set()
        instances, knowledge, options = [], [], []
        has_scenario = False
        while self.tok.kind != "eof":
            if self.at("role"):
                name_tok = self.peek()
                t = self.parse_role()
                if t.name in names:
                    self.error(f"role {t.name!r} defined twice", name_tok)
                names.add(t.name)
                templates.append(t)
            elif self.at("scenario"):
                if has_scenario:
                    self.error("only one scenario block is allowed")
                has_scenario = True
                instances, knowledge = self.parse_scenario({t.name: t for t in templates})
            elif self.at("options"):
                options.extend(self.parse_options())
            else:
                self.error(f"expected 'role', 'scenario' or 'options', found {self.tok.text!r}")
        return SpecFile(tuple(templates), tuple(instances), tuple(knowledge), tuple(options), has_scenario)

    def parse_role(self) -> RoleTemplate:
        self.expect("role")
        name = self.ident("role name").text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                tok = self.ident("parameter")
                if not _is_var_name(tok.text):
                    self.error(f"parameter {tok.text!r} must be a variable (capitalized)", tok)
                if tok.text in params:
                    self.error(f"duplicate parameter {tok.text!r}", tok)
                params.append(tok.text)
                if not self.accept(","):
                    break
        self.expect(")")
        self.expect("as")
        ident_tok = self.ident("role identity")
        if not _is_var_name(ident_tok.text):
            self.error(f"role identity {ident_tok.text!r} must be a variable (capitalized)", ident_tok)
        if ident_tok.text in params:
            self.error(f"identity {ident_tok.text!r} is also a parameter", ident_tok)
        self.expect("{")
        actions = []
        while not self.accept("}"):
            actions.append(self.parse_action())
            self.accept(";")
        role = ExtendedRole(Var(ident_tok.text), tuple(actions), label=name,
                            params=tuple(Var(p) for p in params))
        return RoleTemplate(name, tuple(params), role)

    def parse_action(self) -> Action:
        if self.accept("send"):
            direction, kw = SEND, "to"
        elif self.accept("recv"):
            direction, kw = RECV, "from"
        else:
            self.error(f"expected 'send' or 'recv', found {self.tok.text or 'end of input'!r}")
        msg = self.parse_term()
        self.expect(kw)
        peer = self.parse_atom_term()
        formula = None
        if self.accept("assert"):
            label = None
            if self.tok.kind == "ident" and self.tok.text not in KEYWORDS and self.peek().text == ":":
                label = self.tok.text
                self.i += 2
            formula = self.parse_formula(frozenset())
            if label is not None:
                formula = logic.Labeled(label, formula)
        return Action(msg, peer, direction, formula)

    def parse_scenario(self, templates):
        self.expect("scenario")
        self.expect("{")
        instances, knowledge = [], []
        while not self.accept("}"):
            if self.accept("knowledge"):
                while True:
                    t = self.parse_primary()
                    if not t.ground:
                        self.error("initial knowledge must be ground")
                    knowledge.append(t)
                    if not self.accept(","):
                        break
            else:
                instances.append(self.parse_instance(templates))
            self.accept(";")
        return instances, knowledge

    def parse_instance(self, templates) -> Instantiation:
        tok = self.ident("role name")
        if tok.text not in templates:
            self.error(f"unknown role {tok.text!r}", tok)
        t = templates[tok.text]
        slots = list(t.params) + [t.role.identity.name]
        known = {v.name for v in t.role.variables()}
        args = {}
        self.expect("(")
        positional = 0
        if not self.at(")"):
            while True:
                arg_tok = self.tok
                if self.tok.kind == "ident" and self.peek().text == "=":
                    name = self.tok.text
                    self.i += 2
                    if name not in known:
                        self.error(f"role {t.name!r} has no variable {name!r}", arg_tok)
                else:
                    if positional >= len(slots):
                        self.error(f"too many arguments for role {t.name!r} (expects {len(slots)})", arg_tok)
                    name = slots[positional]
                    positional += 1
                if name in args:
                    self.error(f"{name!r} given twice", arg_tok)
                args[name] = self.parse_primary()
                if not self.accept(","):
                    break
        self.expect(")")
        try:
            instantiate_role(t.role, args, 1)
        except ValueError as exc:
            self.error(str(exc), tok)
        ordered = tuple((n, args[n]) for n in slots + sorted(set(args) - set(slots)) if n in args)
        return Instantiation(t.name, ordered)

    def parse_options(self):
        self.expect("options")
        self.expect("{")
        out = []
        while not self.accept("}"):
            key = self.ident("option name").text
            self.expect("=")
            tok = self.tok
            if tok.kind == "number":
                value = int(tok.text)
            elif tok.kind == "ident":
                value = {"true": True, "false": False}.get(tok.text, tok.text)
            else:
                self.error("expected an option value")
            self.i += 1
            out.append((key, value))
            self.accept(";")
        return out

    # terms
    def parse_term(self) -> Term:
        first = self.parse_primary()
        if self.accept(","):
            return Pair(first, self.parse_term())
        return first

    def parse_atom_term(self) -> Term:
        tok = self.ident("agent name")
        return self._atom(tok)

    def _atom(self, tok: Token) -> Term:
        if tok.text in ("eps", "ε"):
            return INTRUDER
        if _is_var_name(tok.text):
            return Var(tok.text)
        if tok.text[0] == "_":
            self.error(f"identifier {tok.text!r} must start with a letter", tok)
        return Const(tok.text)

    def parse_primary(self) -> Term:
        tok = self.tok
        if self.accept("{"):
            body = self.parse_term()
            self.expect("}")
            key = self.parse_primary()
            return Enc(body, key)
        if self.accept("("):
            t = self.parse_term()
            self.expect(")")
            return t
        if tok.kind == "ident" and self.peek().text == "(" and tok.text in ("pk", "h", "v"):
            self.i += 2
            inner = self.parse_term()
            self.expect(")")
            if tok.text == "pk":
                return Pk(inner)
            if tok.text == "h":
                return Hash(inner)
            if type(inner) is not Pair:
                self.error("v(K, M) needs two arguments", tok)
            return Enc(inner.right, inner.left)
        return self._atom(self.ident("term"))

    # formulas
    def parse_formula(self, events: frozenset) -> logic.Formula:
        left = self.parse_or(events)
        if self.accept("implies"):
            return logic.Implies(left, self.parse_formula(events))
        return left

    def parse_or(self, events):
        f = self.parse_and(events)
        while self.accept("or"):
            f = logic.Or(f, self.parse_and(events))
        return f

    def parse_and(self, events):
        f = self.parse_unary(events)
        while self.accept("and"):
            f = logic.And(f, self.parse_unary(events))
        return f

    def parse_unary(self, events):
        if self.accept("not"):
            return logic.Not(self.parse_unary(events))
        if self.at("forall") or self.at("exists"):
            q = self.tok.text
            self.i += 1
            var = self.ident("bound variable")
            if self.accept("in"):
                self.expect("tr")
                self.expect(":")
                if _is_var_name(var.text):
                    self.error(f"event variable {var.text!r} must be lowercase", var)
                body = self.parse_formula(events | {var.text})
                cls = logic.ForallEvent if q == "forall" else logic.ExistsEvent
                return cls(var.text, body)
            if q == "forall":
                self.error("'forall' ranges over trace events: expected 'in tr'")
            self.expect(":")
            if not _is_var_name(var.text):
                self.error(f"lowercase variable {var.text!r} in binder position", var)
            return logic.ExistsTerm(Var(var.text), self.parse_formula(events))
        return self.parse_atom(events)

    def parse_atom(self, events):
        tok = self.tok
        if self.accept("true"):
            return logic.TRUE
        if self.accept("false"):
            return logic.FALSE
        if self.accept("("):
            f = self.parse_formula(events)
            self.expect(")")
            return f
        if self.accept("subterm"):
            self.expect("(")
            small = self.parse_termref(events)
            self.expect(",")
            big = self.parse_termref(events)
            self.expect(")")
            return logic.Subterm(small, big)
        if self.accept("last_event"):
            self.expect("(")
            name = self.event_var(events)
            self.expect(")")
            return logic.LastEvent(name)
        if tok.kind == "eof":
            self.error("expected a formula, found end of input")
        left = self.parse_event(events)
        self.expect("=")
        right = self.parse_event(events)
        return logic.EventEq(left, right)

    def event_var(self, events) -> str:
        tok = self.ident("event variable")
        if tok.text not in events:
            self.error(f"unbound event variable {tok.text!r}", tok)
        return tok.text

    def parse_event(self, events):
        if self.accept("<"):
            actor = self.parse_atom_term()
            self.expect(":")
            msg = self.parse_term()
            if self.accept("->"):
                direction = SEND
            elif self.accept("<-"):
                direction = RECV
            else:
                self.error("expected '->' or '<-' in event")
            peer = self.parse_atom_term()
            self.expect(">")
            return logic.EventLit(actor, msg, peer, direction)
        return logic.EventVar(self.event_var(events))

    def parse_termref(self, events):
        if self.tok.text == "msg" and self.peek().text == "(":
            self.i += 2
            name = self.event_var(events)
            self.expect(")")
            return logic.Msg(name)
        return self.parse_primary()


def parse(text: str) -> SpecFile:
    """Parse ``.tlp`` text.  Every failure is a ``SpecError`` with a position."""
    try:
        return Parser(text).parse_file()
    except RecursionError:
        raise SpecError("input nested too deeply") from None


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.parse_term()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after term")
    return t


def parse_formula(text: str) -> logic.Formula:
    p = Parser(text)
    f = p.parse_formula(frozenset())
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after formula")
    return f


# -- printing ------------------------------------------------------------------


def render_term(t: Term) -> str:
    return show(t).replace("ε", "eps")


def _render_arg(t: Term) -> str:
    text = render_term(t)
    return f"({text})" if type(t) is Pair else text


def render_formula(f: logic.Formula) -> str:
    return logic.show_formula(f).replace("ε", "eps")


def render_spec(spec: SpecFile) -> str:
    lines = []
    for t in spec.templates:
        ident = render_term(t.role.identity)
        lines.append(f"role {t.name}({', '.join(t.params)}) as {ident} {{")
        for a in t.role.actions:
            kw = "send" if a.direction is SEND else "recv"
            prep = "to" if a.direction is SEND else "from"
            text = f"    {kw} {render_term(a.message)} {prep} {render_term(a.peer)}"
            if a.formula is not None:
                label = f"{a.formula.name} : " if isinstance(a.formula, logic.Labeled) else ""
                text += f"\n        assert {label}{render_formula(a.formula)}"
            lines.append(text)
        lines.append("}")
        lines.append("")
    if spec.has_scenario:
        body = []
        for inst in spec.instances:
            args = ", ".join(f"{n} = {_render_arg(v)}" for n, v in inst.args)
            body.append(f"    {inst.template}({args})")
        if spec.knowledge:
            body.append("    knowledge " + ", ".join(_render_arg(k) for k in spec.knowledge))
        if body:
            lines.append("scenario {")
            lines.extend(body)
            lines.append("}")
        else:
            lines.append("scenario { }")
    if spec.options:
        lines.append("options {")
        for k, v in spec.options:
            value = str(v).lower() if isinstance(v, bool) else str(v)
            lines.append(f"    {k} = {value}")
        lines.append("}")
    return "\n".join(lines) + "\n"
