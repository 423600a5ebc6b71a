"""Message terms: atoms, pairs, encryptions, hashes and public keys.

Terms are immutable and hashable.  Substitutions are plain dicts mapping
``Var`` to ``Term`` and are kept idempotent by every function here that
builds one.
"""
from __future__ import annotations

import itertools
from typing import Iterator, Mapping, Optional

Subst = dict  # Var -> Term, always idempotent


class Term:
    __slots__ = ("_hash", "ground", "size")

    def children(self) -> tuple:
        return ()

    def __repr__(self):
        return show(self)


class Const(Term):
    """A constant.  ``intruder`` marks atoms invented by the intruder."""

    __slots__ = ("name", "intruder")

    def __init__(self, name: str, intruder: bool = False):
        self.name = name
        self.intruder = intruder
        self.ground = True
        self.size = 1
        self._hash = hash(("c", name, intruder))

    def __eq__(self, other):
        return self is other or (
            type(other) is Const and other.name == self.name and other.intruder == self.intruder
        )

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Const, (self.name, self.intruder))


class Var(Term):
    __slots__ = ("name", "index")

    def __init__(self, name: str, index: int = 0):
        self.name = name
        self.index = index
        self.ground = False
        self.size = 1
        self._hash = hash(("v", name, index))

    def __eq__(self, other):
        return self is other or (
            type(other) is Var and other.name == self.name and other.index == self.index
        )

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Var, (self.name, self.index))


class _Compound(Term):
    __slots__ = ()
    _tag = ""

    def _init(self, kids):
        self.ground = all(k.ground for k in kids)
        self.size = 1 + sum(k.size for k in kids)
        self._hash = hash((self._tag,) + kids)

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self) or other._hash != self._hash:
            return False
        return self.children() == other.children()

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (type(self), self.children())


class Pair(_Compound):
    __slots__ = ("left", "right")
    _tag = "pair"

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self._init((left, right))

    def children(self):
        return (self.left, self.right)


class Enc(_Compound):
    """Encryption of ``body`` under ``key``; asymmetric iff ``key`` is a ``Pk``."""

    __slots__ = ("body", "key")
    _tag = "enc"

    def __init__(self, body: Term, key: Term):
        self.body = body
        self.key = key
        self._init((body, key))

    def children(self):
        return (self.body, self.key)


class Hash(_Compound):
    __slots__ = ("body",)
    _tag = "hash"

    def __init__(self, body: Term):
        self.body = body
        self._init((body,))

    def children(self):
        return (self.body,)


class Pk(_Compound):
    __slots__ = ("body",)
    _tag = "pk"

    def __init__(self, body: Term):
        self.body = body
        self._init((body,))

    def children(self):
        return (self.body,)


INTRUDER = Const("eps")


def rebuild(t: Term, kids) -> Term:
    return type(t)(*kids)


def is_atomic(t: Term) -> bool:
    return type(t) in (Const, Var)


def tuple_of(*items: Term) -> Term:
    """Right-nested pairing: ``tuple_of(a, b, c) == Pair(a, Pair(b, c))``."""
    if not items:
        raise ValueError("tuple_of needs at least one term")
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Pair(item, out)
    return out


def vernam(key: Term, body: Term) -> Term:
    return Enc(body, key)


def flatten_pair(t: Term) -> list:
    out = []
    while type(t) is Pair:
        out.append(t.left)
        t = t.right
    out.append(t)
    return out


def depth(t: Term) -> int:
    kids = t.children()
    return 1 + max((depth(k) for k in kids), default=0)


def variables(t: Term) -> set:
    out = set()
    _collect_vars(t, out)
    return out


def _collect_vars(t, out):
    if t.ground:
        return
    if type(t) is Var:
        out.add(t)
        return
    for k in t.children():
        _collect_vars(k, out)


def vars_in_order(terms) -> list:
    """Variables of ``terms`` in first-occurrence (pre-order) order."""
    seen = {}
    stack = list(reversed(list(terms)))
    while stack:
        t = stack.pop()
        if t.ground:
            continue
        if type(t) is Var:
            seen.setdefault(t, None)
        else:
            stack.extend(reversed(t.children()))
    return list(seen)


def subterms(t: Term) -> Iterator[Term]:
    """All subterms of ``t`` in pre-order, ``t`` first.  May repeat."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(s.children()))


def is_subterm(small: Term, big: Term) -> bool:
    if small == big:
        return True
    if small.size >= big.size:
        return False
    return any(is_subterm(small, k) for k in big.children())


def apply(s: Mapping, t: Term) -> Term:
    if t.ground or not s:
        return t
    if type(t) is Var:
        return s.get(t, t)
    kids = t.children()
    new = tuple(apply(s, k) for k in kids)
    if all(a is b for a, b in zip(new, kids)):
        return t
    return type(t)(*new)


def occurs(v: Var, t: Term) -> bool:
    if t.ground:
        return False
    if type(t) is Var:
        return t == v
    return any(occurs(v, k) for k in t.children())


def _bind(s: Subst, v: Var, t: Term) -> Subst:
    single = {v: t}
    out = {k: apply(single, val) for k, val in s.items()}
    out[v] = t
    return out


def unify(t1: Term, t2: Term, under: Optional[Mapping] = None) -> Optional[Subst]:
    """Most general unifier of ``t1`` and ``t2`` extending ``under``.

    Returns ``None`` when the terms do not unify.  The result is idempotent.
    """
    s = dict(under) if under else {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = apply(s, a)
        b = apply(s, b)
        if a == b:
            continue
        if type(a) is Var:
            if occurs(a, b):
                return None
            s = _bind(s, a, b)
        elif type(b) is Var:
            if occurs(b, a):
                return None
            s = _bind(s, b, a)
        elif type(a) is not type(b) or type(a) is Const:
            return None
        else:
            stack.extend(zip(a.children(), b.children()))
    return s


def unify_all(pairs, under: Optional[Mapping] = None) -> Optional[Subst]:
    s = dict(under) if under else {}
    for a, b in pairs:
        s = unify(a, b, s)
        if s is None:
            return None
    return s


def compose(first: Mapping, second: Mapping) -> Subst:
    """The substitution equivalent to applying ``first`` and then ``second``."""
    out = {k: apply(second, v) for k, v in first.items()}
    for k, v in second.items():
        out.setdefault(k, v)
    return {k: v for k, v in out.items() if v != k}


class FreshNamer:
    """Hands out intruder-generated constants ``hint#1``, ``hint#2``, ..."""

    def __init__(self, start: int = 1):
        self._counter = itertools.count(start)

    def fresh(self, hint: str = "n") -> Const:
        return Const(f"{hint.lower()}#{next(self._counter)}", intruder=True)


def ground(t: Term, namer: Optional[FreshNamer] = None, bindings: Optional[dict] = None) -> Term:
    """Replace every variable of ``t`` by a fresh intruder constant.

    ``bindings`` (if given) is consulted and extended so that several terms
    can be grounded consistently.
    """
    namer = namer or FreshNamer()
    bindings = {} if bindings is None else bindings
    for v in vars_in_order([t]):
        if v not in bindings:
            bindings[v] = namer.fresh(v.name)
    return apply(bindings, t)


def show(t: Term) -> str:
    """Compact surface syntax used by the DSL and trace rendering."""
    tt = type(t)
    if tt is Const:
        return "ε" if t == INTRUDER else t.name
    if tt is Var:
        return t.name if t.index == 0 else f"{t.name}_{t.index}"
    if tt is Pair:
        left = show(t.left)
        if type(t.left) is Pair:
            left = f"({left})"
        return f"{left},{show(t.right)}"
    if tt is Enc:
        key = show(t.key)
        if type(t.key) is Pair:
            key = f"({key})"
        return "{" + show(t.body) + "}" + key
    if tt is Hash:
        return f"h({show(t.body)})"
    if tt is Pk:
        return f"pk({show(t.body)})"
    raise TypeError(f"not a term: {t!r}")
