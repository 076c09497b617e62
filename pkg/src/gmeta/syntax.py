"""Abstract syntax: classifiers, types, terms, and substitution.

One family of frozen dataclasses covers the surface language, its static
sister, and the cast calculus.  Meta variables (``Var``) and code variables
(``CVar``) are separate node types, so meta substitution never touches code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Iterator


class Node:
    """Marker base for every syntax node."""

    __slots__ = ()


# ---------------------------------------------------------------------------
# labels and spans


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Label:
    """Blame label: a dense id plus the source span it was allocated for."""

    id: int
    span: Span | None = field(default=None, compare=False, hash=False)

    def __str__(self) -> str:
        return f"L{self.id}"

    def describe(self) -> str:
        where = str(self.span) if self.span else "<unknown>"
        return f"L{self.id} at {where}"


class LabelSource:
    """Allocates labels in program order."""

    def __init__(self, start: int = 1):
        self._ids = itertools.count(start)

    def fresh(self, span: Span | None = None) -> Label:
        return Label(next(self._ids), span)


# ---------------------------------------------------------------------------
# classifiers


class Classifier(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Eps(Classifier):
    def __str__(self) -> str:
        return "eps"


@dataclass(frozen=True)
class Named(Classifier):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Gen(Classifier):
    """A classifier generated at runtime; ``hint`` only affects printing."""

    id: int
    hint: str = field(default="a", compare=False, hash=False)

    def __str__(self) -> str:
        return f"{self.hint}#{self.id}"


EPS = Eps()


class FreshClassifiers:
    """Monotone source of runtime classifiers for one machine."""

    def __init__(self) -> None:
        self._next = 0

    def fresh(self, hint: str = "a") -> Gen:
        g = Gen(self._next, hint.split("#")[0])
        self._next += 1
        return g


def fresh_classifier(state: FreshClassifiers, hint: str = "a") -> Gen:
    return state.fresh(hint)


# ---------------------------------------------------------------------------
# types (meta and code share constructors; Star doubles as the unknown
# classifier, code type and meta type)


class Type(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Star(Type, Classifier):
    def __str__(self) -> str:
        return "?"


STAR = Star()


@dataclass(frozen=True)
class Base(Type):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow(Type):
    dom: Type
    cod: Type

    def __str__(self) -> str:
        d = f"({self.dom})" if isinstance(self.dom, (Arrow, Forall, Constrained)) else str(self.dom)
        return f"{d} -> {self.cod}"


@dataclass(frozen=True)
class RefT(Type):
    elem: Type

    def __str__(self) -> str:
        e = str(self.elem)
        if not isinstance(self.elem, (Base, Star, QuoteT)):
            e = f"({e})"
        return f"Ref {e}"


@dataclass(frozen=True)
class QuoteT(Type):
    code: Type
    cls: Classifier

    def __str__(self) -> str:
        return f"Code<{self.code}>@{self.cls}"


@dataclass(frozen=True)
class Forall(Type):
    var: str
    body: Type

    def __str__(self) -> str:
        return f"forall {self.var}. {self.body}"


@dataclass(frozen=True)
class Constrained(Type):
    lo: Classifier
    hi: Classifier
    body: Type

    def __str__(self) -> str:
        return f"[{self.lo} <: {self.hi}] => {self.body}"


INT = Base("Int")
BOOL = Base("Bool")
UNIT = Base("Unit")
BASE_NAMES = ("Int", "Bool", "Unit")


def has_star(t: Type | Classifier) -> bool:
    if isinstance(t, Star):
        return True
    if isinstance(t, Arrow):
        return has_star(t.dom) or has_star(t.cod)
    if isinstance(t, RefT):
        return has_star(t.elem)
    if isinstance(t, QuoteT):
        return has_star(t.code) or has_star(t.cls)
    if isinstance(t, (Forall, Constrained)):
        return has_star(t.body)
    return False


def alpha_eq(a: Any, b: Any, env: tuple = ()) -> bool:
    """Alpha-equivalence of types (and classifiers) up to bound names."""
    if isinstance(a, Named) and isinstance(b, Named):
        for x, y in env:
            if x == a.name or y == b.name:
                return x == a.name and y == b.name
        return a.name == b.name
    if type(a) is not type(b):
        return False
    if isinstance(a, Arrow):
        return alpha_eq(a.dom, b.dom, env) and alpha_eq(a.cod, b.cod, env)
    if isinstance(a, RefT):
        return alpha_eq(a.elem, b.elem, env)
    if isinstance(a, QuoteT):
        return alpha_eq(a.code, b.code, env) and alpha_eq(a.cls, b.cls, env)
    if isinstance(a, Forall):
        return alpha_eq(a.body, b.body, ((a.var, b.var),) + env)
    if isinstance(a, Constrained):
        return (alpha_eq(a.lo, b.lo, env) and alpha_eq(a.hi, b.hi, env)
                and alpha_eq(a.body, b.body, env))
    return a == b


# ---------------------------------------------------------------------------
# terms


class Term(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    value: int | bool | None

    @property
    def type(self) -> Base:
        if self.value is None:
            return UNIT
        if isinstance(self.value, bool):
            return BOOL
        return INT


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Lam(Term):
    var: str
    ty: Type
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    label: Label


@dataclass(frozen=True)
class Prim(Term):
    """Integer arithmetic in the meta language."""

    op: str
    left: Term
    right: Term
    label: Label


@dataclass(frozen=True)
class RefNew(Term):
    expr: Term
    ty: Type | None = None  # element type, filled in by elaboration


@dataclass(frozen=True)
class Assign(Term):
    target: Term
    value: Term
    label: Label


@dataclass(frozen=True)
class Deref(Term):
    expr: Term
    label: Label


@dataclass(frozen=True)
class Quote(Term):
    body: Term
    cls: Classifier
    finished: bool = False


@dataclass(frozen=True)
class CAbs(Term):
    """Classifier abstraction."""

    var: str
    body: Term


@dataclass(frozen=True)
class CApp(Term):
    """Classifier application ``M [e]``."""

    expr: Term
    cls: Classifier
    label: Label


@dataclass(frozen=True)
class CIntro(Term):
    lo: Classifier
    hi: Classifier
    body: Term


@dataclass(frozen=True)
class CElim(Term):
    expr: Term
    label: Label


@dataclass(frozen=True)
class Let(Term):
    var: str
    ty: Type
    bound: Term
    body: Term
    label: Label


@dataclass(frozen=True)
class Sequence(Term):
    first: Term
    second: Term
    label: Label


@dataclass(frozen=True)
class Addr(Term):
    n: int


@dataclass(frozen=True)
class Cast(Term):
    """``expr<c>`` from ``src`` to ``dst``; ``normal`` marks an irreducible c."""

    expr: Term
    coercion: Any
    src: Type
    dst: Type
    normal: bool = False


@dataclass(frozen=True)
class Blame(Term):
    label: Label


@dataclass(frozen=True)
class DynElim(Term):
    """Runtime-checked constraint elimination ``M . ?L``."""

    expr: Term
    label: Label


# code terms


@dataclass(frozen=True)
class CVar(Term):
    name: str


@dataclass(frozen=True)
class CLam(Term):
    """Code lambda; ``runtime`` marks the generated form."""

    var: str
    ty: Type
    cls: Classifier
    body: Term
    runtime: bool = False


@dataclass(frozen=True)
class CodeApp(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class CodePrim(Term):
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Splice(Term):
    expr: Term
    label: Label


CODE_NODES = (CVar, CLam, CodeApp, CodePrim, Splice)


def is_code_value(m: Term) -> bool:
    """Code values: no splice left anywhere and every lambda generated."""
    if isinstance(m, (CVar, Const)):
        return True
    if isinstance(m, CLam):
        return m.runtime and is_code_value(m.body)
    if isinstance(m, (CodeApp, CodePrim)):
        return is_code_value(m.left if isinstance(m, CodePrim) else m.fn) and \
            is_code_value(m.right if isinstance(m, CodePrim) else m.arg)
    return False


def is_static_code_value(m: Term) -> bool:
    """Code values of the static sister language (lambdas stay unmarked)."""
    if isinstance(m, (CVar, Const)):
        return True
    if isinstance(m, CLam):
        return is_static_code_value(m.body)
    if isinstance(m, CodeApp):
        return is_static_code_value(m.fn) and is_static_code_value(m.arg)
    if isinstance(m, CodePrim):
        return is_static_code_value(m.left) and is_static_code_value(m.right)
    return False


# ---------------------------------------------------------------------------
# generic traversal

_FIELDS: dict[type, tuple[str, ...]] = {}


def _field_names(cls: type) -> tuple[str, ...]:
    names = _FIELDS.get(cls)
    if names is None:
        names = tuple(f.name for f in fields(cls))
        _FIELDS[cls] = names
    return names


def children(node: Node) -> Iterator[Node]:
    for name in _field_names(type(node)):
        v = getattr(node, name)
        if isinstance(v, Node):
            yield v
        elif isinstance(v, tuple):
            for item in v:
                if isinstance(item, Node):
                    yield item


def rebuild(node: Any, fn: Callable[[Any], Any]) -> Any:
    """Apply ``fn`` to every child node; reuse ``node`` if nothing changed."""
    if not isinstance(node, Node) or isinstance(node, (Eps, Star)):
        return node
    cls = type(node)
    values = []
    changed = False
    for name in _field_names(cls):
        v = getattr(node, name)
        if isinstance(v, Node):
            nv = fn(v)
        elif isinstance(v, tuple):
            nv = tuple(fn(x) if isinstance(x, Node) else x for x in v)
            if all(a is b for a, b in zip(nv, v)):
                nv = v
        else:
            nv = v
        changed |= nv is not v
        values.append(nv)
    return cls(*values) if changed else node


# ---------------------------------------------------------------------------
# free names


def _cached(n: Any, key: str, compute: Callable[[Any], frozenset]) -> frozenset:
    # nodes are immutable, so free-name sets are memoized on the node itself
    hit = n.__dict__.get(key)
    if hit is None:
        hit = compute(n)
        object.__setattr__(n, key, hit)
    return hit


def _fv(n: Any) -> frozenset:
    if isinstance(n, Var):
        return frozenset((n.name,))
    if isinstance(n, Lam):
        return _free_vars(n.body) - {n.var}
    if isinstance(n, Let):
        return _free_vars(n.bound) | (_free_vars(n.body) - {n.var})
    out: frozenset = frozenset()
    for c in children(n):
        if isinstance(c, Term):
            out |= _free_vars(c)
    return out


def _free_vars(n: Any) -> frozenset:
    return _cached(n, "_fv_cache", _fv)


def free_vars(m: Any) -> set[str]:
    """Free meta variables."""
    return set(_free_vars(m)) if isinstance(m, Term) else set()


def _fcv(n: Any) -> frozenset:
    if isinstance(n, CVar):
        return frozenset((n.name,))
    if isinstance(n, CLam):
        return _free_cvars(n.body) - {n.var}
    out: frozenset = frozenset()
    for c in children(n):
        if isinstance(c, Term):
            out |= _free_cvars(c)
    return out


def _free_cvars(n: Any) -> frozenset:
    return _cached(n, "_fcv_cache", _fcv)


def free_cvars(m: Any) -> set[str]:
    """Free code variables (binding crosses quote and splice boundaries)."""
    return set(_free_cvars(m)) if isinstance(m, Term) else set()


def _binder_of(n: Any) -> str | None:
    if isinstance(n, (Forall, CAbs)):
        return n.var
    if isinstance(n, CLam) and isinstance(n.cls, Named):
        return n.cls.name
    if type(n).__name__ == "ForallC":
        return n.var
    return None


def _fcls(n: Any) -> frozenset:
    if isinstance(n, Named):
        return frozenset((n.name,))
    out: frozenset = frozenset()
    own_cls = n.cls if isinstance(n, CLam) else None
    for c in children(n):
        if c is own_cls:
            continue
        if isinstance(c, Node):
            out |= _free_classifiers(c)
    b = _binder_of(n)
    return out - {b} if b is not None else out


def _free_classifiers(n: Any) -> frozenset:
    return _cached(n, "_fcls_cache", _fcls)


def free_classifiers(m: Any) -> set[str]:
    """Free named classifiers in any node (terms, types, coercions)."""
    return set(_free_classifiers(m)) if isinstance(m, Node) else set()


_renames = itertools.count()


def _fresh_name(base: str, avoid: set[str]) -> str:
    base = base.split("'")[0]
    while True:
        cand = f"{base}'{next(_renames)}"
        if cand not in avoid:
            return cand


# ---------------------------------------------------------------------------
# substitution


def rename_cvar(m: Term, old: str, new: str) -> Term:
    def go(n: Any) -> Any:
        if isinstance(n, CVar):
            return CVar(new) if n.name == old else n
        if isinstance(n, CLam) and n.var == old:
            return n
        if isinstance(n, Term):
            return rebuild(n, lambda c: go(c) if isinstance(c, Term) else c)
        return n

    return go(m)


def subst_term(body: Term, var: str, value: Term) -> Term:
    """Capture-avoiding ``body[var := value]`` for a meta variable."""
    fv = free_vars(value)
    fcv = free_cvars(value)
    fcls = free_classifiers(value)

    def go(n: Any) -> Any:
        if isinstance(n, Var):
            return value if n.name == var else n
        if not isinstance(n, Term) or isinstance(n, (Const, Addr, CVar, Blame)):
            return n
        if var not in _free_vars(n):
            return n
        if isinstance(n, Lam):
            if n.var == var:
                return n
            if n.var in fv and var in free_vars(n.body):
                new = _fresh_name(n.var, fv | free_vars(n.body))
                n = Lam(new, n.ty, subst_term(n.body, n.var, Var(new)))
            return Lam(n.var, n.ty, go(n.body))
        if isinstance(n, Let):
            bound = go(n.bound)
            if n.var == var:
                return Let(n.var, n.ty, bound, n.body, n.label)
            nb = n.body
            nv = n.var
            if nv in fv and var in free_vars(nb):
                nv = _fresh_name(nv, fv | free_vars(nb))
                nb = subst_term(nb, n.var, Var(nv))
            return Let(nv, n.ty, bound, go(nb), n.label)
        if isinstance(n, CLam):
            if (n.var in fcv or (isinstance(n.cls, Named) and n.cls.name in fcls)) \
                    and var in free_vars(n.body):
                n = _freshen_clam(n, fcv, fcls)
            return rebuild(n, go)
        if isinstance(n, CAbs):
            if n.var in fcls and var in free_vars(n.body):
                new = _fresh_name(n.var, fcls | free_classifiers(n.body))
                n = CAbs(new, subst_classifier(n.body, n.var, Named(new)))
            return rebuild(n, go)
        return rebuild(n, lambda c: go(c) if isinstance(c, Term) else c)

    if var not in free_vars(body):
        return body
    return go(body)


def _freshen_clam(n: CLam, fcv: set[str], fcls: set[str]) -> CLam:
    body, var, cls = n.body, n.var, n.cls
    if var in fcv:
        new = _fresh_name(var, fcv | free_cvars(body))
        body = rename_cvar(body, var, new)
        var = new
    if isinstance(cls, Named) and cls.name in fcls:
        new = _fresh_name(cls.name, fcls | free_classifiers(body))
        body = subst_classifier(body, cls.name, Named(new))
        cls = Named(new)
    return CLam(var, n.ty, cls, body, n.runtime)


def subst_classifier(target: Any, var: str, repl: Classifier) -> Any:
    """Capture-avoiding replacement of the named classifier ``var``.

    Works uniformly on terms, types and coercions of every kind.
    """
    avoid = {repl.name} if isinstance(repl, Named) else set()

    def go(n: Any) -> Any:
        if isinstance(n, Named):
            return repl if n.name == var else n
        if not isinstance(n, Node) or isinstance(n, (Eps, Star, Gen, Base, Const,
                                                     Var, CVar, Addr, Blame)):
            return n
        b = _binder_of(n)
        if b is not None:
            if b == var:
                # shadowed; a code lambda's own classifier is still a use site
                return n
            if b in avoid and var in free_classifiers(n):
                n = _rename_binder(n, b, _fresh_name(b, avoid | free_classifiers(n)))
        return rebuild(n, go)

    return go(target)


def _rename_binder(n: Any, old: str, new: str) -> Any:
    if isinstance(n, Forall):
        return Forall(new, subst_classifier(n.body, old, Named(new)))
    if isinstance(n, CAbs):
        return CAbs(new, subst_classifier(n.body, old, Named(new)))
    if isinstance(n, CLam):
        return CLam(n.var, n.ty, Named(new), subst_classifier(n.body, old, Named(new)), n.runtime)
    # coercion binder
    return type(n)(new, subst_classifier(n.body, old, Named(new)))


def strip_labels(m: Any) -> Any:
    """Replace every label by L0; used to compare ASTs modulo labelling."""
    zero = Label(0)

    def go(n: Any) -> Any:
        if isinstance(n, Label):
            return zero
        if isinstance(n, Node):
            cls = type(n)
            vals = []
            for name in _field_names(cls):
                v = getattr(n, name)
                if isinstance(v, Label):
                    v = zero
                elif isinstance(v, Node):
                    v = go(v)
                elif isinstance(v, tuple):
                    v = tuple(go(x) for x in v)
                vals.append(v)
            return cls(*vals)
        return n

    return go(m)


def term_size(m: Any) -> int:
    return 1 + sum(term_size(c) for c in children(m)) if isinstance(m, Node) else 0
